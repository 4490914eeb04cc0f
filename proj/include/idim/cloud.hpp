#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace idim {

// Finite stand-in for a bounded subset of R^n.  `resolution` is a bound on
// the symmetric Hausdorff distance between the listed points and the set
// they discretize; estimators must not probe scales below a small multiple
// of it.
struct PointCloud {
    int ambient_dim = 1;
    double resolution = 0.0;
    std::string provenance;
    std::vector<double> coords;  // flattened, size() * ambient_dim entries

    std::size_t size() const { return coords.size() / static_cast<std::size_t>(ambient_dim); }

    const double* point(std::size_t i) const { return coords.data() + i * static_cast<std::size_t>(ambient_dim); }

    double coord(std::size_t i, int j) const { return coords[i * static_cast<std::size_t>(ambient_dim) + static_cast<std::size_t>(j)]; }

    // Radius of the smallest origin-centered ball containing the cloud.
    double max_norm() const;

    // Throws std::invalid_argument on violated invariants (empty cloud,
    // non-finite coordinates, negative resolution, size mismatch).
    void validate() const;
};

double point_distance(const PointCloud& cloud, std::size_t i, std::size_t j);

// Keeps one point per axis-aligned cell of the given side length (the first
// in cloud order, so the result is deterministic).  The reported resolution
// grows by a cell diagonal.  Supports ambient dimension <= 4.
PointCloud subsample_to_spacing(const PointCloud& cloud, double spacing);

// Text format: one header line "dim,n_points,resolution", one line with the
// values, then one comma-separated point per line.  `header_comment` lines
// (if any) are emitted first, each prefixed with "# ".
void write_cloud_csv(const PointCloud& cloud, std::ostream& out, const std::string& header_comment = {});
PointCloud read_cloud_csv(std::istream& in);

// Compact binary: magic "IDCL", u32 dim, u64 count, f64 resolution, then
// little-endian f64 rows.
void write_cloud_binary(const PointCloud& cloud, std::ostream& out);
PointCloud read_cloud_binary(std::istream& in);

}  // namespace idim
