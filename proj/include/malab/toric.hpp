#pragma once

#include <array>
#include <string>
#include <vector>

namespace malab {

/// Extra site standing in for a point mass at a corner of the moment square.
struct CornerSite {
    std::string location;
    double t1 = 0.0;
    double t2 = 0.0;
    double value = 0.0;
};

/// Convex potential known on a tensor node set in (t1, t2), plus optional
/// corner sites. Values are the full potential, not the offset.
class ToricGrid {
public:
    ToricGrid() = default;
    ToricGrid(std::vector<double> axis1, std::vector<double> axis2, std::vector<double> values,
              std::vector<CornerSite> corners = {});

    const std::vector<double>& axis1() const { return axis1_; }
    const std::vector<double>& axis2() const { return axis2_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<CornerSite>& corners() const { return corners_; }
    std::size_t rows() const { return axis1_.size(); }
    std::size_t cols() const { return axis2_.size(); }
    std::size_t grid_size() const { return values_.size(); }
    /// Grid nodes followed by corner sites.
    std::size_t site_count() const { return values_.size() + corners_.size(); }
    std::size_t index(std::size_t i, std::size_t j) const { return i * axis2_.size() + j; }
    double value(std::size_t i, std::size_t j) const { return values_[index(i, j)]; }
    std::array<double, 2> site(std::size_t k) const;
    double site_value(std::size_t k) const;

    /// Same node set, new site values (grid nodes then corners).
    ToricGrid with_site_values(const std::vector<double>& site_values) const;

private:
    std::vector<double> axis1_;
    std::vector<double> axis2_;
    std::vector<double> values_;
    std::vector<CornerSite> corners_;
};

struct Facet {
    std::size_t neighbor = 0;
    double length = 0.0;
};

/// Laguerre cell of a site inside the unit moment square:
/// {x : x . t_k - Psi_k >= x . t_j - Psi_j for all j}.
struct LaguerreCell {
    double area = 0.0;
    std::vector<Facet> facets;
    std::vector<std::array<double, 2>> vertices;
};

struct LaguerreDiagram {
    std::vector<LaguerreCell> cells;
    double total_area = 0.0;
    int stencil_radius = 0;
};

/// Convex moment polygon, counter-clockwise.
using MomentPolygon = std::vector<std::array<double, 2>>;
MomentPolygon unit_square_polygon();
/// {x1, x2 >= 0, x1 + x2 <= size}.
MomentPolygon simplex_polygon(double size);
double polygon_area(const MomentPolygon& polygon);

/// Cells of every site; neighbours are searched in a growing index stencil
/// until the cell areas tile the polygon to 1e-10 (relative).
LaguerreDiagram laguerre_diagram(const ToricGrid& potential, int initial_radius = 2);
LaguerreDiagram laguerre_diagram(const ToricGrid& potential, const MomentPolygon& polygon,
                                 int initial_radius = 2);

/// Convex envelope value at a site, from the tessellation vertices; equals the
/// site value unless its cell is empty.
std::vector<double> convexified_values(const ToricGrid& potential, const LaguerreDiagram& diagram);

}  // namespace malab
