#include "malab/toric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "malab/errors.hpp"

namespace malab {

namespace {

using Point = std::array<double, 2>;

// Convex polygon with the label of the edge leaving each vertex
// (-1 for the boundary of the moment square).
struct Polygon {
    std::vector<Point> vertices;
    std::vector<long> labels;
};


// Keeps {x : normal . x <= offset}; the new edge carries `label`.
void clip(Polygon& polygon, const Point& normal, double offset, long label) {
    const std::size_t n = polygon.vertices.size();
    if (n == 0) return;
    Polygon out;
    out.vertices.reserve(n + 1);
    out.labels.reserve(n + 1);
    bool any_outside = false;
    std::vector<double> side(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = polygon.vertices[i];
        side[i] = normal[0] * p[0] + normal[1] * p[1] - offset;
        if (side[i] > 0.0) any_outside = true;
    }
    if (!any_outside) return;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t next = (i + 1) % n;
        const auto& p = polygon.vertices[i];
        const auto& q = polygon.vertices[next];
        const bool p_in = side[i] <= 0.0;
        const bool q_in = side[next] <= 0.0;
        if (p_in) {
            out.vertices.push_back(p);
            out.labels.push_back(polygon.labels[i]);
        }
        if (p_in != q_in) {
            const double w = side[i] / (side[i] - side[next]);
            const Point x{p[0] + w * (q[0] - p[0]), p[1] + w * (q[1] - p[1])};
            out.vertices.push_back(x);
            out.labels.push_back(p_in ? label : polygon.labels[i]);
        }
    }
    polygon = std::move(out);
}

double area_of(const Polygon& polygon) {
    const std::size_t n = polygon.vertices.size();
    if (n < 3) return 0.0;
    double twice = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = polygon.vertices[i];
        const auto& q = polygon.vertices[(i + 1) % n];
        twice += p[0] * q[1] - q[0] * p[1];
    }
    return std::max(0.0, 0.5 * twice);
}

LaguerreCell build_cell(const ToricGrid& potential, std::size_t k,
                        const std::vector<std::size_t>& candidates, const MomentPolygon& domain) {
    const auto tk = potential.site(k);
    const double vk = potential.site_value(k);
    Polygon polygon{domain, std::vector<long>(domain.size(), -1)};
    for (std::size_t j : candidates) {
        if (j == k) continue;
        const auto tj = potential.site(j);
        // x . (t_j - t_k) <= Psi_j - Psi_k
        const Point normal{tj[0] - tk[0], tj[1] - tk[1]};
        clip(polygon, normal, potential.site_value(j) - vk, static_cast<long>(j));
        if (polygon.vertices.empty()) break;
    }
    LaguerreCell cell;
    cell.area = area_of(polygon);
    cell.vertices = polygon.vertices;
    const std::size_t n = polygon.vertices.size();
    for (std::size_t i = 0; i < n && cell.area > 0.0; ++i) {
        if (polygon.labels[i] < 0) continue;
        const auto& p = polygon.vertices[i];
        const auto& q = polygon.vertices[(i + 1) % n];
        const double length = std::hypot(q[0] - p[0], q[1] - p[1]);
        if (length <= 0.0) continue;
        const auto neighbor = static_cast<std::size_t>(polygon.labels[i]);
        auto it = std::find_if(cell.facets.begin(), cell.facets.end(),
                               [&](const Facet& f) { return f.neighbor == neighbor; });
        if (it == cell.facets.end()) {
            cell.facets.push_back({neighbor, length});
        } else {
            it->length += length;
        }
    }
    return cell;
}

}  // namespace

MomentPolygon unit_square_polygon() { return {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}; }

MomentPolygon simplex_polygon(double size) { return {{0.0, 0.0}, {size, 0.0}, {0.0, size}}; }

double polygon_area(const MomentPolygon& polygon) {
    return area_of(Polygon{polygon, std::vector<long>(polygon.size(), -1)});
}

ToricGrid::ToricGrid(std::vector<double> axis1, std::vector<double> axis2,
                     std::vector<double> values, std::vector<CornerSite> corners)
    : axis1_(std::move(axis1)), axis2_(std::move(axis2)), values_(std::move(values)),
      corners_(std::move(corners)) {
    if (axis1_.empty() || axis2_.empty() || values_.size() != axis1_.size() * axis2_.size()) {
        throw InvalidInput("toric grid dimensions do not match its values");
    }
    for (const auto* axis : {&axis1_, &axis2_}) {
        for (std::size_t i = 1; i < axis->size(); ++i) {
            if (!((*axis)[i] > (*axis)[i - 1])) throw InvalidInput("toric axes must increase");
        }
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw InvalidInput("non-finite toric potential value");
    }
}

std::array<double, 2> ToricGrid::site(std::size_t k) const {
    if (k < values_.size()) return {axis1_[k / axis2_.size()], axis2_[k % axis2_.size()]};
    const auto& corner = corners_.at(k - values_.size());
    return {corner.t1, corner.t2};
}

double ToricGrid::site_value(std::size_t k) const {
    if (k < values_.size()) return values_[k];
    return corners_.at(k - values_.size()).value;
}

ToricGrid ToricGrid::with_site_values(const std::vector<double>& site_values) const {
    if (site_values.size() != site_count()) throw InvalidInput("site value count mismatch");
    ToricGrid copy = *this;
    std::copy(site_values.begin(), site_values.begin() + static_cast<long>(values_.size()),
              copy.values_.begin());
    for (std::size_t c = 0; c < corners_.size(); ++c) {
        copy.corners_[c].value = site_values[values_.size() + c];
    }
    return copy;
}

LaguerreDiagram laguerre_diagram(const ToricGrid& potential, int initial_radius) {
    return laguerre_diagram(potential, unit_square_polygon(), initial_radius);
}

LaguerreDiagram laguerre_diagram(const ToricGrid& potential, const MomentPolygon& polygon,
                                 int initial_radius) {
    const double domain_area = polygon_area(polygon);
    const long rows = static_cast<long>(potential.rows());
    const long cols = static_cast<long>(potential.cols());
    const std::size_t grid_sites = potential.grid_size();
    const std::size_t sites = potential.site_count();
    const long max_radius = std::max(rows, cols);

    for (long radius = std::max(1, initial_radius);; radius *= 2) {
        const long r = std::min(radius, max_radius);
        LaguerreDiagram diagram;
        diagram.stencil_radius = static_cast<int>(r);
        diagram.cells.resize(sites);
        std::vector<std::size_t> candidates;
        for (std::size_t k = 0; k < sites; ++k) {
            candidates.clear();
            if (k < grid_sites) {
                const long i = static_cast<long>(k) / cols;
                const long j = static_cast<long>(k) % cols;
                for (long a = std::max(0L, i - r); a <= std::min(rows - 1, i + r); ++a) {
                    for (long b = std::max(0L, j - r); b <= std::min(cols - 1, j + r); ++b) {
                        candidates.push_back(static_cast<std::size_t>(a * cols + b));
                    }
                }
            } else {
                // Corner sites see the grid block nearest to their corner.
                const auto t = potential.site(k);
                const bool low1 = t[0] < potential.axis1().front();
                const bool low2 = t[1] < potential.axis2().front();
                const long i0 = low1 ? 0 : std::max(0L, rows - 1 - r);
                const long j0 = low2 ? 0 : std::max(0L, cols - 1 - r);
                for (long a = i0; a <= std::min(rows - 1, i0 + r); ++a) {
                    for (long b = j0; b <= std::min(cols - 1, j0 + r); ++b) {
                        candidates.push_back(static_cast<std::size_t>(a * cols + b));
                    }
                }
            }
            for (std::size_t c = grid_sites; c < sites; ++c) candidates.push_back(c);
            diagram.cells[k] = build_cell(potential, k, candidates, polygon);
            diagram.total_area += diagram.cells[k].area;
        }
        const double gap = std::abs(diagram.total_area - domain_area) / domain_area;
        if (gap <= 1e-10 || r >= max_radius) {
            if (gap > 1e-8) {
                throw Error("Laguerre cells fail to tile the moment polygon");
            }
            return diagram;
        }
    }
}

std::vector<double> convexified_values(const ToricGrid& potential, const LaguerreDiagram& diagram) {
    // Legendre dual at each tessellation vertex, then the double transform at the sites.
    std::vector<std::array<double, 3>> dual;  // x1, x2, Phi(x)
    for (std::size_t k = 0; k < diagram.cells.size(); ++k) {
        const auto t = potential.site(k);
        for (const auto& x : diagram.cells[k].vertices) {
            dual.push_back({x[0], x[1], x[0] * t[0] + x[1] * t[1] - potential.site_value(k)});
        }
    }
    std::vector<double> out(potential.site_count());
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (diagram.cells[k].area > 0.0) {
            out[k] = potential.site_value(k);
            continue;
        }
        const auto t = potential.site(k);
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& d : dual) best = std::max(best, d[0] * t[0] + d[1] * t[1] - d[2]);
        out[k] = std::min(best, potential.site_value(k));
    }
    return out;
}

}  // namespace malab
