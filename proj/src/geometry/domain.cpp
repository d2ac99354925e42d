#include "geometry/domain.hpp"

#include <cmath>
#include <limits>

#include "core/errors.hpp"

namespace kinetic {

double vec_norm(const Vec& a, int dim) { return std::sqrt(norm2(a, dim)); }

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dist_point_segment(const Vec& p, const Vec& a, const Vec& b, Vec* closest = nullptr) {
    const double dx = b[0] - a[0], dy = b[1] - a[1];
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2 : 0.0;
    t = std::max(0.0, std::min(1.0, t));
    const Vec c = {a[0] + t * dx, a[1] + t * dy};
    if (closest) *closest = c;
    const double ex = p[0] - c[0], ey = p[1] - c[1];
    return std::sqrt(ex * ex + ey * ey);
}

bool segments_properly_intersect(const Vec& a, const Vec& b, const Vec& c, const Vec& d) {
    auto cross = [](const Vec& o, const Vec& p, const Vec& q) {
        return (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0]);
    };
    const double d1 = cross(c, d, a), d2 = cross(c, d, b), d3 = cross(a, b, c), d4 = cross(a, b, d);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

} // namespace

DomainSpec DomainSpec::torus(int dim) {
    if (dim < 1 || dim > 2) throw ConfigError("torus dimension must be 1 or 2");
    DomainSpec d;
    d.kind_ = DomainKind::Torus;
    d.dim_ = dim;
    return d;
}

DomainSpec DomainSpec::disk(double radius) {
    if (!(radius > 0)) throw ConfigError("disk radius must be positive");
    DomainSpec d;
    d.kind_ = DomainKind::Disk;
    d.dim_ = 2;
    d.radius_ = radius;
    return d;
}

DomainSpec DomainSpec::polygon(std::vector<Vec> vertices) {
    if (vertices.size() < 3) throw ConfigError("polygon needs at least 3 vertices");
    // orientation: shoelace must be positive
    double twice_area = 0.0;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec& a = vertices[i];
        const Vec& b = vertices[(i + 1) % n];
        twice_area += a[0] * b[1] - b[0] * a[1];
    }
    if (!(twice_area > 0)) throw ConfigError("polygon vertex list must be positively oriented");
    // simplicity: no two non-adjacent edges properly intersect
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (segments_properly_intersect(vertices[i], vertices[(i + 1) % n],
                                            vertices[j], vertices[(j + 1) % n]))
                throw ConfigError("polygon vertex list is self-intersecting");
        }
    }
    DomainSpec d;
    d.kind_ = DomainKind::Polygon;
    d.dim_ = 2;
    d.vertices_ = std::move(vertices);
    return d;
}

DomainSpec DomainSpec::stadium(double straight_length, double cap_radius) {
    if (!(straight_length > 0) || !(cap_radius > 0))
        throw ConfigError("stadium requires positive straight length and cap radius");
    DomainSpec d;
    d.kind_ = DomainKind::Stadium;
    d.dim_ = 2;
    d.straight_ = straight_length;
    d.radius_ = cap_radius;
    return d;
}

std::string DomainSpec::describe() const {
    switch (kind_) {
        case DomainKind::Torus: return "torus(d=" + std::to_string(dim_) + ")";
        case DomainKind::Disk: return "disk(r=" + std::to_string(radius_) + ")";
        case DomainKind::Polygon: return "polygon(" + std::to_string(vertices_.size()) + " vertices)";
        case DomainKind::Stadium:
            return "stadium(L=" + std::to_string(straight_) + ", r=" + std::to_string(radius_) + ")";
    }
    return "?";
}

Vec DomainSpec::canonicalize(const Vec& x) const {
    if (kind_ != DomainKind::Torus) return x;
    Vec y = x;
    for (int i = 0; i < dim_; ++i) {
        y[i] = y[i] - std::floor(y[i]);
        if (y[i] >= 1.0) y[i] = 0.0;  // guard against floor(1-eps) rounding
    }
    return y;
}

Vec DomainSpec::wrap_delta(const Vec& a, const Vec& b) const {
    Vec d = {a[0] - b[0], a[1] - b[1]};
    if (kind_ == DomainKind::Torus) {
        for (int i = 0; i < dim_; ++i) d[i] -= std::round(d[i]);
    }
    return d;
}

bool DomainSpec::inside(const Vec& x) const {
    if (kind_ == DomainKind::Torus) return true;
    return boundary_value(x) < 0.0;
}

double DomainSpec::boundary_value(const Vec& x) const {
    switch (kind_) {
        case DomainKind::Torus:
            return -kInf;
        case DomainKind::Disk:
            return vec_norm(x, 2) - radius_;
        case DomainKind::Stadium: {
            const double hl = 0.5 * straight_;
            if (std::abs(x[0]) <= hl) return std::abs(x[1]) - radius_;
            const double cx = x[0] > 0 ? hl : -hl;
            const double ex = x[0] - cx, ey = x[1];
            return std::sqrt(ex * ex + ey * ey) - radius_;
        }
        case DomainKind::Polygon: {
            double dist = kInf;
            const std::size_t n = vertices_.size();
            for (std::size_t i = 0; i < n; ++i)
                dist = std::min(dist, dist_point_segment(x, vertices_[i], vertices_[(i + 1) % n]));
            // crossing-number parity for the sign
            bool in = false;
            for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
                const Vec& vi = vertices_[i];
                const Vec& vj = vertices_[j];
                if ((vi[1] > x[1]) != (vj[1] > x[1])) {
                    const double xx = (vj[0] - vi[0]) * (x[1] - vi[1]) / (vj[1] - vi[1]) + vi[0];
                    if (x[0] < xx) in = !in;
                }
            }
            return in ? -dist : dist;
        }
    }
    return -kInf;
}

Vec DomainSpec::outward_normal(const Vec& x) const {
    switch (kind_) {
        case DomainKind::Torus:
            throw ContractError("torus has no boundary normal");
        case DomainKind::Disk: {
            const double r = vec_norm(x, 2);
            if (r <= 0) throw ContractError("normal undefined at disk center");
            return {x[0] / r, x[1] / r};
        }
        case DomainKind::Stadium: {
            const double hl = 0.5 * straight_;
            if (std::abs(x[0]) <= hl) return {0.0, x[1] >= 0 ? 1.0 : -1.0};
            const double cx = x[0] > 0 ? hl : -hl;
            Vec e = {x[0] - cx, x[1]};
            const double r = vec_norm(e, 2);
            if (r <= 0) throw ContractError("normal undefined at stadium cap center");
            return {e[0] / r, e[1] / r};
        }
        case DomainKind::Polygon: {
            const std::size_t n = vertices_.size();
            double best = kInf;
            std::size_t bi = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = dist_point_segment(x, vertices_[i], vertices_[(i + 1) % n]);
                if (d < best) {
                    best = d;
                    bi = i;
                }
            }
            const Vec& a = vertices_[bi];
            const Vec& b = vertices_[(bi + 1) % n];
            const double ex = b[0] - a[0], ey = b[1] - a[1];
            const double len = std::sqrt(ex * ex + ey * ey);
            // positively oriented boundary: outward normal is the right-hand normal
            return {ey / len, -ex / len};
        }
    }
    return {0, 0};
}

double DomainSpec::corner_distance(const Vec& x) const {
    if (kind_ != DomainKind::Polygon) return kInf;
    double best = kInf;
    for (const Vec& v : vertices_) {
        const double ex = x[0] - v[0], ey = x[1] - v[1];
        best = std::min(best, std::sqrt(ex * ex + ey * ey));
    }
    return best;
}

void DomainSpec::bounding_box(Vec& lo, Vec& hi) const {
    switch (kind_) {
        case DomainKind::Torus:
            lo = {0.0, 0.0};
            hi = {1.0, dim_ > 1 ? 1.0 : 0.0};
            if (dim_ == 1) hi = {1.0, 0.0};
            break;
        case DomainKind::Disk:
            lo = {-radius_, -radius_};
            hi = {radius_, radius_};
            break;
        case DomainKind::Stadium:
            lo = {-0.5 * straight_ - radius_, -radius_};
            hi = {0.5 * straight_ + radius_, radius_};
            break;
        case DomainKind::Polygon: {
            lo = {kInf, kInf};
            hi = {-kInf, -kInf};
            for (const Vec& v : vertices_) {
                lo[0] = std::min(lo[0], v[0]);
                lo[1] = std::min(lo[1], v[1]);
                hi[0] = std::max(hi[0], v[0]);
                hi[1] = std::max(hi[1], v[1]);
            }
            break;
        }
    }
}

double DomainSpec::area() const {
    const double pi = 3.14159265358979323846264338327950288;
    switch (kind_) {
        case DomainKind::Torus: return 1.0;
        case DomainKind::Disk: return pi * radius_ * radius_;
        case DomainKind::Stadium: return straight_ * 2.0 * radius_ + pi * radius_ * radius_;
        case DomainKind::Polygon: {
            double twice = 0.0;
            const std::size_t n = vertices_.size();
            for (std::size_t i = 0; i < n; ++i) {
                const Vec& a = vertices_[i];
                const Vec& b = vertices_[(i + 1) % n];
                twice += a[0] * b[1] - b[0] * a[1];
            }
            return 0.5 * twice;
        }
    }
    return 0.0;
}

} // namespace kinetic
