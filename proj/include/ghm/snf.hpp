#pragma once

// Exact Smith normal form over the integers.

#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace ghm {

using BigInt = boost::multiprecision::cpp_int;
using BigMatrix = std::vector<std::vector<BigInt>>;  // row-major, rectangular

/// U * A * V = D with U, V unimodular and D diagonal; the nonzero diagonal
/// entries d_0 | d_1 | ... are positive.
struct SmithForm
{
    std::size_t rows = 0;
    std::size_t cols = 0;
    int rank = 0;
    std::vector<BigInt> divisors;  // length rank
    BigMatrix U;                   // rows x rows
    BigMatrix U_inv;               // rows x rows
    BigMatrix V;                   // cols x cols
};

/// `track` = false skips the transforms (only rank and divisors are filled).
SmithForm smith_normal_form(BigMatrix a, bool track = true);

BigMatrix identity_matrix(std::size_t n);
BigMatrix multiply(const BigMatrix& a, const BigMatrix& b);

/// Inverse of a square integer matrix with determinant +-1; empty otherwise.
std::optional<BigMatrix> unimodular_inverse(const BigMatrix& a);

}  // namespace ghm
