#pragma once

#include <cmath>
#include <vector>

namespace lanercnn {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(const Vec2& o) {
        x += o.x;
        y += o.y;
        return *this;
    }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double norm_sq() const { return x * x + y * y; }

    Vec2 normalized() const {
        double n = norm();
        return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
    }

    // 90-degree counter-clockwise rotation (left normal of a tangent)
    Vec2 perp() const { return {-y, x}; }

    double angle() const { return std::atan2(y, x); }
};

inline Vec2 rotate(const Vec2& v, double theta) {
    double c = std::cos(theta), s = std::sin(theta);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// Position plus unit heading.
struct Pose {
    Vec2 position;
    Vec2 direction{1.0, 0.0};

    double heading() const { return direction.angle(); }

    // Express a world point in this pose's frame.
    Vec2 to_local(const Vec2& world) const {
        Vec2 d = world - position;
        return {direction.x * d.x + direction.y * d.y,
                -direction.y * d.x + direction.x * d.y};
    }

    // Express a world vector (no translation) in this pose's frame.
    Vec2 vector_to_local(const Vec2& v) const {
        return {direction.x * v.x + direction.y * v.y,
                -direction.y * v.x + direction.x * v.y};
    }
};

// Wrap to (-pi, pi].
inline double wrap_angle(double a) {
    const double pi = 3.14159265358979323846;
    while (a > pi) a -= 2.0 * pi;
    while (a <= -pi) a += 2.0 * pi;
    return a;
}

inline double polyline_length(const std::vector<Vec2>& pts) {
    double total = 0.0;
    for (size_t i = 1; i < pts.size(); ++i) total += (pts[i] - pts[i - 1]).norm();
    return total;
}

}  // namespace lanercnn
