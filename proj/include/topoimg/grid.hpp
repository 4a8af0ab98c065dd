#ifndef TOPOIMG_GRID_HPP
#define TOPOIMG_GRID_HPP

#include <array>
#include <string>
#include <vector>

#include "topoimg/types.hpp"

namespace topoimg {

// Regular sampling box; nodes sit at cell centers so region areas are
// plain cell sums.
struct InspectionGrid {
    int dim = 2;
    std::array<double, 3> lo{-0.1, -0.1, -0.1};
    std::array<double, 3> hi{0.1, 0.1, 0.1};
    std::array<int, 3> res{100, 100, 1};

    static InspectionGrid square(double half_extent = 0.1, int n = 100);
    static InspectionGrid cube(double half_extent = 0.1, int n = 41);

    void validate() const;
    long node_count() const;
    double step(int axis) const { return (hi[axis] - lo[axis]) / res[axis]; }
    double coord(int axis, int i) const { return lo[axis] + (i + 0.5) * step(axis); }
    long flat_index(int ix, int iy, int iz = 0) const {
        return ((long)iz * res[1] + iy) * res[0] + ix;
    }
    void unflatten(long idx, int& ix, int& iy, int& iz) const;
    Vec2 point2(long idx) const;
    Vec3 point3(long idx) const;
    double cell_measure() const;  // area in 2D, volume in 3D

    bool operator==(const InspectionGrid& o) const {
        return dim == o.dim && lo == o.lo && hi == o.hi && res == o.res;
    }
};

enum class FieldKind { TD, TE };

struct Provenance {
    std::vector<int> emitters;
    std::vector<int> frequencies;
    std::string dataset_id;
};

struct ScalarGrid {
    InspectionGrid grid;
    FieldKind kind = FieldKind::TD;
    std::vector<double> values;
    Provenance provenance;

    double min() const;
    double max() const;
    long argmin() const;
    long argmax() const;
};

// Serialization: CSV node table, JSON sidecar with bounds/extrema, and a
// binary P6 heatmap (blue-white-red; central z slice for 3D grids).
void write_grid_csv(const ScalarGrid& g, const std::string& path);
void write_grid_sidecar(const ScalarGrid& g, const std::string& path);
void write_grid_ppm(const ScalarGrid& g, const std::string& path);

}  // namespace topoimg

#endif
