#include "ghm/snf.hpp"

#include <utility>

#include "ghm/errors.hpp"

namespace ghm {

namespace {

// Elimination state: A is reduced in place while row operations are mirrored
// into U (left) and U_inv (right, inverse op), column operations into V.
struct Reducer
{
    BigMatrix& a;
    BigMatrix* u;
    BigMatrix* u_inv;
    BigMatrix* v;
    std::size_t m;
    std::size_t n;

    // row_i -= q * row_t
    void row_sub(std::size_t i, std::size_t t, const BigInt& q)
    {
        for (std::size_t c = 0; c < n; ++c)
            if (!a[t][c].is_zero()) a[i][c] -= q * a[t][c];
        if (u) {
            for (std::size_t c = 0; c < m; ++c)
                if (!(*u)[t][c].is_zero()) (*u)[i][c] -= q * (*u)[t][c];
            // inverse: col_t += q * col_i
            for (std::size_t r = 0; r < m; ++r)
                if (!(*u_inv)[r][i].is_zero()) (*u_inv)[r][t] += q * (*u_inv)[r][i];
        }
    }

    // col_j -= q * col_t
    void col_sub(std::size_t j, std::size_t t, const BigInt& q)
    {
        for (std::size_t r = 0; r < m; ++r)
            if (!a[r][t].is_zero()) a[r][j] -= q * a[r][t];
        if (v) {
            for (std::size_t r = 0; r < n; ++r)
                if (!(*v)[r][t].is_zero()) (*v)[r][j] -= q * (*v)[r][t];
        }
    }

    void swap_rows(std::size_t i, std::size_t j)
    {
        if (i == j) return;
        std::swap(a[i], a[j]);
        if (u) {
            std::swap((*u)[i], (*u)[j]);
            for (std::size_t r = 0; r < m; ++r) std::swap((*u_inv)[r][i], (*u_inv)[r][j]);
        }
    }

    void swap_cols(std::size_t i, std::size_t j)
    {
        if (i == j) return;
        for (std::size_t r = 0; r < m; ++r) std::swap(a[r][i], a[r][j]);
        if (v)
            for (std::size_t r = 0; r < n; ++r) std::swap((*v)[r][i], (*v)[r][j]);
    }

    void negate_row(std::size_t i)
    {
        for (auto& x : a[i]) x = -x;
        if (u) {
            for (auto& x : (*u)[i]) x = -x;
            for (std::size_t r = 0; r < m; ++r) (*u_inv)[r][i] = -(*u_inv)[r][i];
        }
    }
};

BigInt floor_div(const BigInt& x, const BigInt& y)
{
    BigInt q = x / y;  // truncates toward zero
    if ((x % y != 0) && ((x < 0) != (y < 0))) --q;
    return q;
}

}  // namespace

BigMatrix identity_matrix(std::size_t n)
{
    BigMatrix id(n, std::vector<BigInt>(n));
    for (std::size_t i = 0; i < n; ++i) id[i][i] = 1;
    return id;
}

BigMatrix multiply(const BigMatrix& a, const BigMatrix& b)
{
    if (a.empty()) return {};
    const std::size_t inner = b.size();
    const std::size_t cols = inner == 0 ? 0 : b[0].size();
    BigMatrix out(a.size(), std::vector<BigInt>(cols));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < inner; ++k) {
            if (a[i][k].is_zero()) continue;
            for (std::size_t j = 0; j < cols; ++j)
                if (!b[k][j].is_zero()) out[i][j] += a[i][k] * b[k][j];
        }
    return out;
}

SmithForm smith_normal_form(BigMatrix a, bool track)
{
    SmithForm out;
    out.rows = a.size();
    out.cols = a.empty() ? 0 : a[0].size();
    const std::size_t m = out.rows;
    const std::size_t n = out.cols;
    for (const auto& row : a)
        if (row.size() != n) throw Error(Errc::InvalidArgument, "ragged matrix");

    if (track) {
        out.U = identity_matrix(m);
        out.U_inv = identity_matrix(m);
        out.V = identity_matrix(n);
    }
    Reducer red{a, track ? &out.U : nullptr, track ? &out.U_inv : nullptr,
                track ? &out.V : nullptr, m, n};

    std::size_t t = 0;
    while (t < m && t < n) {
        // pivot: smallest nonzero magnitude in the trailing block
        bool found = false;
        std::size_t pr = t, pc = t;
        BigInt best;
        for (std::size_t r = t; r < m; ++r)
            for (std::size_t c = t; c < n; ++c) {
                if (a[r][c].is_zero()) continue;
                BigInt mag = abs(a[r][c]);
                if (!found || mag < best) {
                    best = mag;
                    pr = r;
                    pc = c;
                    found = true;
                    if (best == 1) goto picked;
                }
            }
    picked:
        if (!found) break;
        red.swap_rows(t, pr);
        red.swap_cols(t, pc);

        for (;;) {
            bool dirty = false;
            for (std::size_t r = t + 1; r < m; ++r) {
                if (a[r][t].is_zero()) continue;
                red.row_sub(r, t, floor_div(a[r][t], a[t][t]));
                if (!a[r][t].is_zero()) {
                    red.swap_rows(t, r);
                    dirty = true;
                }
            }
            for (std::size_t c = t + 1; c < n; ++c) {
                if (a[t][c].is_zero()) continue;
                red.col_sub(c, t, floor_div(a[t][c], a[t][t]));
                if (!a[t][c].is_zero()) {
                    red.swap_cols(t, c);
                    dirty = true;
                }
            }
            if (dirty) continue;
            // divisibility of the trailing block
            std::size_t bad_row = m;
            for (std::size_t r = t + 1; r < m && bad_row == m; ++r)
                for (std::size_t c = t + 1; c < n; ++c)
                    if (a[r][c] % a[t][t] != 0) {
                        bad_row = r;
                        break;
                    }
            if (bad_row == m) break;
            // row_t += row_bad brings a non-multiple into the pivot row
            red.row_sub(t, bad_row, BigInt(-1));
        }
        if (a[t][t] < 0) red.negate_row(t);
        out.divisors.push_back(a[t][t]);
        ++t;
    }
    out.rank = static_cast<int>(out.divisors.size());
    return out;
}

std::optional<BigMatrix> unimodular_inverse(const BigMatrix& a)
{
    const std::size_t n = a.size();
    for (const auto& row : a)
        if (row.size() != n) return std::nullopt;
    if (n == 0) return BigMatrix{};
    SmithForm s = smith_normal_form(a, true);
    if (s.rank != static_cast<int>(n)) return std::nullopt;
    for (const auto& d : s.divisors)
        if (d != 1) return std::nullopt;
    // U A V = I  =>  A^{-1} = V U
    return multiply(s.V, s.U);
}

}  // namespace ghm
