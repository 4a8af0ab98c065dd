#ifndef TOPOIMG_REGIONS_HPP
#define TOPOIMG_REGIONS_HPP

#include <string>
#include <vector>

#include "topoimg/grid.hpp"
#include "topoimg/material.hpp"
#include "topoimg/types.hpp"

namespace topoimg {

enum class ThresholdMode { MinSide, MaxSide };

struct RegionMask {
    InspectionGrid grid;
    std::vector<char> membership;
    double lambda = 0.0;
    ThresholdMode mode = ThresholdMode::MinSide;
    double extremum = 0.0;

    long count() const;
};

// Level-set reconstruction: TD keeps nodes with value <= lambda * min
// (min < 0 required), TE keeps value >= lambda * max (max > 0).
RegionMask extract(const ScalarGrid& field, double lambda);

// Ground-truth primitives for scoring synthetic reconstructions.
struct ShapePrimitive {
    enum class Type { Disk, Box, Point } type = Type::Disk;
    Vec3 center;                 // Disk: (x,y); Point: location
    double radius = 0.0;         // Disk
    Vec3 extent;                 // Box: half extents
    std::string material;        // annotation only
};

struct ShapeTruth {
    std::vector<ShapePrimitive> shapes;
};

struct RegionMetrics {
    double jaccard = 0.0;
    Vec3 mask_centroid;
    Vec3 truth_centroid;
    double centroid_offset = 0.0;  // meters
    int components = 0;            // 4-connectivity in 2D, 6 in 3D
    double measure = 0.0;          // mask area (m^2) or volume (m^3)
};

RegionMetrics score(const RegionMask& mask, const ShapeTruth& truth);

// Optional cleanup: drop connected components smaller than min_cells.
// Raw level sets are kept by default everywhere.
RegionMask prune_small_components(const RegionMask& mask, long min_cells);

// Rasterization used by score: a cell belongs to the truth when its center
// lies inside some primitive.
std::vector<char> rasterize(const ShapeTruth& truth, const InspectionGrid& grid);

// Mask file: '# key value' header carrying the grid, then one CSV row of
// node indices and coordinates per member cell.
void write_mask_csv(const RegionMask& mask, const std::string& path);
RegionMask read_mask_csv(const std::string& path);
void write_metrics_json(const RegionMetrics& m, const std::string& path);
void write_truth_json(const ShapeTruth& t, const std::string& path);
ShapeTruth read_truth_json(const std::string& path);

}  // namespace topoimg

#endif
