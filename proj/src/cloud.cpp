#include "idim/cloud.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <unordered_map>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace idim {

double PointCloud::max_norm() const {
    double best = 0.0;
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
        double q = 0.0;
        const double* x = point(i);
        for (int j = 0; j < ambient_dim; ++j) q += x[j] * x[j];
        best = std::max(best, q);
    }
    return std::sqrt(best);
}

void PointCloud::validate() const {
    if (ambient_dim < 1) throw std::invalid_argument("cloud: ambient dimension must be >= 1");
    if (coords.empty()) throw std::invalid_argument("cloud: empty");
    if (coords.size() % static_cast<std::size_t>(ambient_dim) != 0)
        throw std::invalid_argument("cloud: coordinate count not a multiple of dimension");
    if (!(resolution >= 0.0) || !std::isfinite(resolution))
        throw std::invalid_argument("cloud: resolution must be finite and >= 0");
    for (double v : coords)
        if (!std::isfinite(v)) throw std::invalid_argument("cloud: non-finite coordinate");
}

double point_distance(const PointCloud& cloud, std::size_t i, std::size_t j) {
    double q = 0.0;
    const double* a = cloud.point(i);
    const double* b = cloud.point(j);
    for (int k = 0; k < cloud.ambient_dim; ++k) {
        const double d = a[k] - b[k];
        q += d * d;
    }
    return std::sqrt(q);
}

namespace {

void write_double(std::ostream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
}

}  // namespace

PointCloud subsample_to_spacing(const PointCloud& cloud, double spacing) {
    cloud.validate();
    if (!(spacing > 0.0)) throw std::invalid_argument("subsample: spacing must be positive");
    const int dim = cloud.ambient_dim;
    if (dim > 4) throw std::invalid_argument("subsample: ambient dimension above 4 unsupported");

    struct CellHash {
        std::size_t operator()(const std::array<std::int64_t, 4>& cell) const {
            std::uint64_t h = 1469598103934665603ull;
            for (std::int64_t v : cell) {
                h ^= static_cast<std::uint64_t>(v);
                h *= 1099511628211ull;
            }
            return static_cast<std::size_t>(h);
        }
    };

    PointCloud out;
    out.ambient_dim = dim;
    out.resolution = cloud.resolution + spacing * std::sqrt(static_cast<double>(dim));
    out.provenance = cloud.provenance;
    std::unordered_map<std::array<std::int64_t, 4>, std::size_t, CellHash> seen;
    seen.reserve(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        std::array<std::int64_t, 4> cell{0, 0, 0, 0};
        const double* x = cloud.point(i);
        for (int a = 0; a < dim; ++a) cell[static_cast<std::size_t>(a)] = static_cast<std::int64_t>(std::floor(x[a] / spacing));
        if (!seen.emplace(cell, i).second) continue;
        for (int a = 0; a < dim; ++a) out.coords.push_back(x[a]);
    }
    return out;
}


void write_cloud_csv(const PointCloud& cloud, std::ostream& out, const std::string& header_comment) {
    if (!header_comment.empty()) {
        std::istringstream lines(header_comment);
        std::string line;
        while (std::getline(lines, line)) out << "# " << line << '\n';
    }
    out << "dim,n_points,resolution\n";
    out << cloud.ambient_dim << ',' << cloud.size() << ',';
    write_double(out, cloud.resolution);
    out << '\n';
    const std::size_t n = cloud.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double* x = cloud.point(i);
        for (int j = 0; j < cloud.ambient_dim; ++j) {
            if (j) out << ',';
            write_double(out, x[j]);
        }
        out << '\n';
    }
}

PointCloud read_cloud_csv(std::istream& in) {
    std::string line;
    auto next_data_line = [&](std::string& dst) {
        while (std::getline(in, dst)) {
            if (!dst.empty() && dst[0] != '#') return true;
        }
        return false;
    };
    if (!next_data_line(line) || line.rfind("dim,", 0) != 0)
        throw std::runtime_error("cloud csv: missing header");
    if (!next_data_line(line)) throw std::runtime_error("cloud csv: missing size line");

    PointCloud cloud;
    std::size_t n_points = 0;
    {
        std::istringstream ss(line);
        char comma;
        if (!(ss >> cloud.ambient_dim >> comma >> n_points >> comma >> cloud.resolution))
            throw std::runtime_error("cloud csv: bad size line");
    }
    cloud.coords.reserve(n_points * static_cast<std::size_t>(cloud.ambient_dim));
    while (next_data_line(line)) {
        std::istringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ','))
            cloud.coords.push_back(std::stod(field));
    }
    if (cloud.size() != n_points) throw std::runtime_error("cloud csv: point count mismatch");
    cloud.validate();
    return cloud;
}

namespace {
constexpr char kMagic[4] = {'I', 'D', 'C', 'L'};
}

void write_cloud_binary(const PointCloud& cloud, std::ostream& out) {
    out.write(kMagic, 4);
    const std::uint32_t dim = static_cast<std::uint32_t>(cloud.ambient_dim);
    const std::uint64_t count = cloud.size();
    out.write(reinterpret_cast<const char*>(&dim), sizeof dim);
    out.write(reinterpret_cast<const char*>(&count), sizeof count);
    out.write(reinterpret_cast<const char*>(&cloud.resolution), sizeof cloud.resolution);
    out.write(reinterpret_cast<const char*>(cloud.coords.data()),
              static_cast<std::streamsize>(cloud.coords.size() * sizeof(double)));
}

PointCloud read_cloud_binary(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("cloud binary: bad magic");
    std::uint32_t dim = 0;
    std::uint64_t count = 0;
    PointCloud cloud;
    in.read(reinterpret_cast<char*>(&dim), sizeof dim);
    in.read(reinterpret_cast<char*>(&count), sizeof count);
    in.read(reinterpret_cast<char*>(&cloud.resolution), sizeof cloud.resolution);
    cloud.ambient_dim = static_cast<int>(dim);
    cloud.coords.resize(count * dim);
    in.read(reinterpret_cast<char*>(cloud.coords.data()),
            static_cast<std::streamsize>(cloud.coords.size() * sizeof(double)));
    if (!in) throw std::runtime_error("cloud binary: truncated");
    cloud.validate();
    return cloud;
}

}  // namespace idim
