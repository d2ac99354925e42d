#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace kinetic {

/// Position/velocity in up to 2 spatial dimensions; coordinates beyond dim are 0.
using Vec = std::array<double, 2>;

inline Vec vec1(double x) { return {x, 0.0}; }
inline Vec vec2(double x, double y) { return {x, y}; }

inline double dot(const Vec& a, const Vec& b, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += a[i] * b[i];
    return s;
}
inline double norm2(const Vec& a, int dim) { return dot(a, a, dim); }
double vec_norm(const Vec& a, int dim);

enum class DomainKind { Torus, Disk, Polygon, Stadium };

/**
 * Spatial domain: the flat torus [0,1)^d, or a bounded billiard table
 * (disk, simple polygon, Bunimovich stadium) with specular walls.
 *
 * Bounded domains expose a signed boundary function (negative inside) and
 * the outward unit normal away from the corner set.
 */
class DomainSpec {
public:
    static DomainSpec torus(int dim);
    static DomainSpec disk(double radius);
    static DomainSpec polygon(std::vector<Vec> vertices);          // simple, positively oriented
    static DomainSpec stadium(double straight_length, double cap_radius);

    DomainKind kind() const { return kind_; }
    int dim() const { return dim_; }
    bool bounded() const { return kind_ != DomainKind::Torus; }
    std::string describe() const;

    /// Torus positions wrap into [0,1)^d; identity for bounded domains.
    Vec canonicalize(const Vec& x) const;

    /// Shortest displacement a-b on the torus (plain difference otherwise).
    Vec wrap_delta(const Vec& a, const Vec& b) const;

    bool inside(const Vec& x) const;

    /// Signed boundary value, negative inside, zero on the wall. Torus: -inf semantics (never hits).
    double boundary_value(const Vec& x) const;

    /// Outward unit normal at (or near) the boundary point x.
    Vec outward_normal(const Vec& x) const;

    /// Distance from x to the nearest corner (+inf when the boundary is corner-free).
    double corner_distance(const Vec& x) const;

    /// Axis-aligned bounding box of the closure ([0,1)^d for the torus).
    void bounding_box(Vec& lo, Vec& hi) const;

    double area() const;   // d-volume of the domain

    const std::vector<Vec>& vertices() const { return vertices_; }
    double radius() const { return radius_; }
    double straight_length() const { return straight_; }

private:
    DomainSpec() = default;

    DomainKind kind_ = DomainKind::Torus;
    int dim_ = 1;
    double radius_ = 0.0;    // disk / stadium cap
    double straight_ = 0.0;  // stadium
    std::vector<Vec> vertices_;
};

} // namespace kinetic
