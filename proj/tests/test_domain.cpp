#include <doctest.h>

#include <cmath>

#include "ghm/domain.hpp"
#include "ghm/errors.hpp"
#include "support.hpp"

using namespace ghm;
using namespace ghm::testing;

namespace {

// Holes counted by polygon nesting: clockwise components are inner ones.
int nested_holes(const HallwayDomain& d)
{
    int inner = 0;
    for (const auto& poly : d.boundary())
        if (signed_area(poly) < 0) ++inner;
    return inner;
}

}  // namespace

TEST_CASE("single square has one boundary component and no holes")
{
    const auto d = build_domain({{0, 0, 200, 200}});
    CHECK(d.boundary().size() == 1);
    CHECK(d.genus() == 0);
    CHECK(d.skeleton().cycle_rank() == 0);
    CHECK(d.area() == doctest::Approx(40000.0));
}

TEST_CASE("thin strip has a one-edge skeleton")
{
    const auto d = build_domain({{0, 0, 10, 1}});
    CHECK(d.skeleton().edges.size() == 1);
    CHECK(d.genus() == 0);
    CHECK(d.boundary().size() == 1);
}

TEST_CASE("square frame is an annulus")
{
    const auto d = build_domain(annulus_rects(20, 2));
    CHECK(d.genus() == 1);
    CHECK(d.boundary().size() == 2);
    CHECK(d.skeleton().cycle_rank() == 1);
    CHECK(d.area() == doctest::Approx(20.0 * 20.0 - 16.0 * 16.0));
    CHECK(nested_holes(d) == 1);
}

TEST_CASE("figure eight has two holes")
{
    const auto d = build_domain({{0, 0, 30, 2}, {0, 8, 30, 10}, {0, 0, 2, 10}, {14, 0, 16, 10}, {28, 0, 30, 10}});
    CHECK(d.genus() == 2);
    CHECK(d.boundary().size() == 3);
    CHECK(d.skeleton().cycle_rank() == 2);
    CHECK(nested_holes(d) == 2);
    CHECK(d.skeleton_cycle_basis().non_tree_edges.size() == 2);
}

TEST_CASE("hallway grid: outer ring plus central cross")
{
    const auto d = build_domain({{0, 196, 200, 200},
                                 {0, 0, 200, 4},
                                 {0, 0, 4, 200},
                                 {196, 0, 200, 200},
                                 {98, 0, 102, 200},
                                 {0, 98, 200, 102}});
    CHECK(d.genus() == 4);
    CHECK(d.skeleton().cycle_rank() == 4);
    CHECK(nested_holes(d) == 4);
}

TEST_CASE("Euler relation matches nesting on assorted layouts")
{
    const std::vector<std::vector<Rect>> layouts = {
        {{0, 0, 5, 1}, {4, 0, 5, 6}},                        // L
        {{0, 0, 9, 1}, {4, 0, 5, 6}},                        // T
        {{0, 2, 9, 3}, {4, 0, 5, 6}},                        // plus
        annulus_rects(12, 3),
        figure_eight_rects(40, 12, 3),
        {{0, 0, 10, 10}, {8, 8, 20, 12}},                    // blob with a spur
    };
    for (const auto& rects : layouts)
    {
        const auto d = build_domain(rects);
        CHECK(d.skeleton().cycle_rank() == d.genus());
        CHECK(nested_holes(d) == d.genus());
        for (const auto& e : d.skeleton().edges)
            for (const auto& p : e.polyline) CHECK(d.contains(p));
    }
}

TEST_CASE("construction errors")
{
    CHECK_THROWS_AS(build_domain({}), Error);
    try
    {
        build_domain({{0, 0, 0, 5}});
        FAIL("expected DegenerateRect");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == Errc::DegenerateRect);
        CHECK(e.exit_code() == 2);
    }
    try
    {
        build_domain({{0, 0, 1, 1}, {3, 3, 4, 4}});
        FAIL("expected DisconnectedDomain");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == Errc::DisconnectedDomain);
    }
}

TEST_CASE("closed containment")
{
    const auto d = build_domain(annulus_rects(20, 2));
    CHECK(d.contains({1, 10}));
    CHECK(d.contains({2, 10}));  // on the inner wall
    CHECK(d.contains({0, 0}));
    CHECK_FALSE(d.contains({10, 10}));
    CHECK_FALSE(d.contains({21, 21}));
    for (const auto& r : d.rects()) CHECK(d.contains(r.center()));
}

TEST_CASE("sampling is deterministic and inside the domain")
{
    const auto d = build_domain({{0, 0, 1, 1}});
    const auto a = sample_points(d, 1000, 7);
    const auto b = sample_points(d, 1000, 7);
    REQUIRE(a.size() == 1000);
    CHECK(a == b);
    for (const auto& p : a) CHECK(d.contains(p));
    CHECK(sample_points(d, 1000, 8) != a);

    const auto frame = build_domain(figure_eight_rects(60, 20, 3));
    for (std::uint64_t seed = 0; seed < 20; ++seed)
        for (const auto& p : sample_points(frame, 200, seed)) REQUIRE(frame.contains(p));
}

TEST_CASE("sampling is area-proportional over the disjoint cells")
{
    // Binomial oracle: each cell count within 4 sigma of N * area / total.
    const auto d = build_domain(annulus_rects(20, 3));
    const std::size_t N = 4000;
    const auto pts = sample_points(d, N, 1);
    const double total = d.area();
    for (const auto& cell : d.cells())
    {
        std::size_t count = 0;
        for (const auto& p : pts)
            if (p.x >= cell.xmin && p.x < cell.xmax && p.y >= cell.ymin && p.y < cell.ymax) ++count;
        const double q = cell.area() / total;
        const double mean = N * q;
        const double sigma = std::sqrt(N * q * (1 - q));
        CHECK(std::abs(static_cast<double>(count) - mean) <= 4 * sigma + 1);
    }
}

TEST_CASE("200 x 200 square sample")
{
    const auto d = build_domain({{0, 0, 200, 200}});
    const auto pts = sample_points(d, 16250, 0);
    CHECK(pts.size() == 16250);
}

TEST_CASE("skeleton projector measures loops around the annulus")
{
    const auto d = build_domain(annulus_rects(20, 2));
    const SkeletonProjector proj(d);
    REQUIRE(proj.basis().non_tree_edges.size() == 1);
    // Walk around the frame counterclockwise, then clockwise.
    const std::vector<Point> ccw = {{1, 1}, {10, 1}, {19, 1}, {19, 10}, {19, 19}, {10, 19}, {1, 19}, {1, 10}};
    const auto c1 = proj.loop_coordinates(ccw);
    CHECK(std::abs(c1[0]) == 1);
    std::vector<Point> cw(ccw.rbegin(), ccw.rend());
    CHECK(proj.loop_coordinates(cw)[0] == -c1[0]);
    // Twice around.
    std::vector<Point> twice = ccw;
    twice.insert(twice.end(), ccw.begin(), ccw.end());
    CHECK(proj.loop_coordinates(twice)[0] == 2 * c1[0]);
    // Back-and-forth on one side is trivial.
    const std::vector<Point> shuttle = {{1, 1}, {10, 1}, {19, 1}, {10, 1}};
    CHECK(proj.loop_coordinates(shuttle)[0] == 0);
}

TEST_CASE("boundary components are closed simple polylines")
{
    const auto d = build_domain(figure_eight_rects(40, 12, 3));
    for (const auto& poly : d.boundary())
    {
        CHECK(poly.size() >= 4);
        for (std::size_t i = 0; i < poly.size(); ++i)
            for (std::size_t j = i + 1; j < poly.size(); ++j) CHECK_FALSE(poly[i] == poly[j]);
    }
    CHECK(signed_area(d.boundary()[d.outer_boundary()]) > 0);
}
