#include <doctest.h>

#include "ghm/rng.hpp"
#include "ghm/snf.hpp"

using namespace ghm;

namespace {

BigMatrix from_ints(const std::vector<std::vector<long long>>& a)
{
    BigMatrix m;
    for (const auto& row : a)
    {
        m.emplace_back();
        for (long long x : row) m.back().emplace_back(x);
    }
    return m;
}

void check_decomposition(const BigMatrix& a)
{
    const SmithForm s = smith_normal_form(a);
    const BigMatrix d = multiply(multiply(s.U, a), s.V);
    for (std::size_t i = 0; i < s.rows; ++i)
        for (std::size_t j = 0; j < s.cols; ++j)
        {
            if (i == j && i < static_cast<std::size_t>(s.rank))
                CHECK(d[i][j] == s.divisors[i]);
            else
                CHECK(d[i][j] == 0);
        }
    for (int i = 0; i + 1 < s.rank; ++i)
    {
        CHECK(s.divisors[i] > 0);
        CHECK(s.divisors[i + 1] % s.divisors[i] == 0);
    }
    CHECK(multiply(s.U, s.U_inv) == identity_matrix(s.rows));
}

}  // namespace

TEST_CASE("known Smith forms")
{
    auto s = smith_normal_form(from_ints({{2, 4, 4}, {-6, 6, 12}, {10, -4, -16}}));
    REQUIRE(s.rank == 3);
    CHECK(s.divisors[0] == 2);
    CHECK(s.divisors[1] == 6);
    CHECK(s.divisors[2] == 12);

    s = smith_normal_form(from_ints({{2, 0}, {0, 3}}));
    REQUIRE(s.rank == 2);
    CHECK(s.divisors[0] == 1);
    CHECK(s.divisors[1] == 6);

    s = smith_normal_form(from_ints({{0, 0}, {0, 0}}));
    CHECK(s.rank == 0);
}

TEST_CASE("U A V = D on random matrices")
{
    Rng rng(5);
    for (int trial = 0; trial < 60; ++trial)
    {
        const auto rows = 1 + rng.below(6);
        const auto cols = 1 + rng.below(6);
        std::vector<std::vector<long long>> a(rows, std::vector<long long>(cols));
        for (auto& row : a)
            for (auto& x : row) x = rng.below(3) == 0 ? 0 : static_cast<long long>(rng.below(19)) - 9;
        check_decomposition(from_ints(a));
    }
}

TEST_CASE("unimodular inverse")
{
    const auto a = from_ints({{2, 1}, {1, 1}});
    const auto inv = unimodular_inverse(a);
    REQUIRE(inv);
    CHECK(multiply(a, *inv) == identity_matrix(2));
    CHECK_FALSE(unimodular_inverse(from_ints({{2, 0}, {0, 1}})));
    CHECK_FALSE(unimodular_inverse(from_ints({{1, 2}, {2, 4}})));
}
