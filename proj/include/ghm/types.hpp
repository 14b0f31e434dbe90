#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace ghm {

using NodeId = std::int32_t;
using Phase = std::int32_t;
using Tick = std::int64_t;

inline constexpr NodeId kNoNode = -1;

struct Point
{
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm2(Point a) { return dot(a, a); }
inline double dist2(Point a, Point b) { return norm2(a - b); }
inline double dist(Point a, Point b) { return std::sqrt(dist2(a, b)); }

/// Closest point to `p` on segment [a, b], with the segment parameter in [0, 1].
struct SegmentProjection
{
    Point point;
    double t = 0.0;
};

inline SegmentProjection project_to_segment(Point p, Point a, Point b)
{
    const Point ab = b - a;
    const double len2 = norm2(ab);
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return {a + t * ab, t};
}

/// Axis-aligned rectangle, closed.
struct Rect
{
    double xmin = 0.0;
    double ymin = 0.0;
    double xmax = 0.0;
    double ymax = 0.0;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double area() const { return width() * height(); }
    Point center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }
    bool horizontal() const { return width() >= height(); }

    bool contains(Point p) const
    {
        return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
    }

    friend bool operator==(const Rect&, const Rect&) = default;
};

/// Closed intersection; may be degenerate (zero width or height) or empty.
inline bool intersect(const Rect& a, const Rect& b, Rect& out)
{
    out = {std::max(a.xmin, b.xmin), std::max(a.ymin, b.ymin),
           std::min(a.xmax, b.xmax), std::min(a.ymax, b.ymax)};
    return out.xmin <= out.xmax && out.ymin <= out.ymax;
}

}  // namespace ghm
