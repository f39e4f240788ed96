#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cvdiff/potentials.hpp"

namespace cvdiff {

/// Cartesian (q, p) grid: q_i = -pi + 2 pi i / nq (i < nq, periodic),
/// p_j = -lp + 2 lp j / np (j <= np).
struct GridSpec {
    int nq = 128;
    int np = 192;
    double lp = 9.0;

    double dq() const;
    double dp() const;
    double q_node(int i) const;
    double p_node(int j) const;
    void validate() const;
};

/// Metadata written to the binary cache header.
struct GridMetadata {
    double beta = 1.0;
    double gamma = 1.0;
    std::string potential = "cosine";
    std::string source = "galerkin";  // "galerkin" | "underdamped" | ...
};

/// Control-variate values psi and d_p psi tabulated on a GridSpec, with the
/// bilinear interpolant and the precomputed d[psi]. Immutable once built.
class GridCV {
public:
    GridCV(GridSpec spec, GridMetadata meta, std::vector<double> psi, std::vector<double> dpsi);

    /// Tabulates f(q, p) -> (psi, d_p psi) on every node.
    static GridCV tabulate(GridSpec spec, GridMetadata meta,
                           const std::function<std::pair<double, double>(double, double)>& f);

    const GridSpec& spec() const noexcept { return spec_; }
    const GridMetadata& metadata() const noexcept { return meta_; }
    const std::vector<double>& values_psi() const noexcept { return psi_; }
    const std::vector<double>& values_dpsi() const noexcept { return dpsi_; }

    double psi_at(int i, int j) const { return psi_[index(i, j)]; }
    double dpsi_at(int i, int j) const { return dpsi_[index(i, j)]; }

    struct Sample {
        double psi;
        double dpsi;
    };
    /// Bilinear interpolation of both tables. q is reduced to [-pi, pi);
    /// p outside [-lp, lp] is clamped to the boundary.
    Sample interpolate(double q, double p) const noexcept;
    double interpolate_psi(double q, double p) const noexcept;
    double interpolate_dpsi(double q, double p) const noexcept;

    /// d[psi] attached to this grid (set by compute_d or read from cache); NaN if unset.
    double d_psi() const noexcept { return d_psi_; }
    void set_d_psi(double d) noexcept { d_psi_ = d; }

    void save(const std::filesystem::path& path) const;
    static GridCV load(const std::filesystem::path& path);
    /// Bytes of the cache file (what save() writes).
    std::string serialize() const;
    static GridCV deserialize(const std::string& bytes);

private:
    std::size_t index(int i, int j) const noexcept {
        return static_cast<std::size_t>(i) * (spec_.np + 1) + static_cast<std::size_t>(j);
    }
    struct Cell {
        std::size_t i00, i10, i01, i11;
        double tq, tp;
    };
    Cell locate(double q, double p) const noexcept;

    GridSpec spec_;
    GridMetadata meta_;
    std::vector<double> psi_;
    std::vector<double> dpsi_;
    double d_psi_;
    double inv_dq_;
    double inv_dp_;
};

/// d[psi] = gamma / beta * int |d_p psi|^2 dmu for the interpolated gradient:
/// trapezoid over `q_nodes` periodic nodes in q and over the grid nodes in p,
/// normalized by the partition function of the same quadrature.
double compute_d(const GridCV& grid, const Potential1D& potential, double gamma, double beta, int q_nodes = 1024);

/// Same functional for psi(q, p) = psi_1D(q_axis, p_axis) under the 2D measure mu_delta:
/// the q-marginal of the other coordinate is integrated out on `q_nodes` nodes.
double compute_d_tensorized(const GridCV& grid, const Potential2D& potential, int axis, double gamma, double beta,
                            int q_nodes = 1024);

/// 2D control variate built from a 1D grid: psi(q, p) = psi_1D(q_axis, p_axis),
/// grad_p psi = d_p psi_1D along `axis`, zero along the other direction.
class TensorizedGridCV {
public:
    TensorizedGridCV(std::shared_ptr<const GridCV> grid, const Potential2D& potential, int axis, double gamma,
                     double beta, int q_nodes = 1024);

    double value(const std::array<double, 2>& q, const std::array<double, 2>& p) const noexcept {
        return grid_->interpolate_psi(q[axis_], p[axis_]);
    }
    std::array<double, 2> grad_p(const std::array<double, 2>& q, const std::array<double, 2>& p) const noexcept {
        std::array<double, 2> g{0.0, 0.0};
        g[axis_] = grid_->interpolate_dpsi(q[axis_], p[axis_]);
        return g;
    }
    double d_psi() const noexcept { return d_psi_; }
    int axis() const noexcept { return axis_; }
    const GridCV& grid() const noexcept { return *grid_; }

private:
    std::shared_ptr<const GridCV> grid_;
    int axis_;
    double d_psi_;
};

/// (q, p, z) grid for GLE control variates read from file: psi and d_z psi,
/// trilinear interpolation, q periodic, p and z clamped to [-lp, lp], [-lz, lz].
struct GleGridSpec {
    int nq = 64;
    int np = 64;
    int nz = 64;
    double lp = 8.0;
    double lz = 8.0;
    void validate() const;
};

struct GleGridMetadata {
    double beta = 1.0;
    double gamma = 1.0;
    double nu = 1.0;
    std::string potential = "cosine";
    std::string source = "file";
};

class GleGridCV {
public:
    GleGridCV(GleGridSpec spec, GleGridMetadata meta, std::vector<double> psi, std::vector<double> dzpsi);

    /// Tabulates f(q, p, z) -> (psi, d_z psi).
    static GleGridCV tabulate(GleGridSpec spec, GleGridMetadata meta,
                              const std::function<std::pair<double, double>(double, double, double)>& f);

    struct Sample {
        double psi;
        double dzpsi;
    };
    Sample interpolate(double q, double p, double z) const noexcept;

    const GleGridSpec& spec() const noexcept { return spec_; }
    const GleGridMetadata& metadata() const noexcept { return meta_; }

    void save(const std::filesystem::path& path) const;
    static GleGridCV load(const std::filesystem::path& path);
    std::string serialize() const;

private:
    std::size_t index(int i, int j, int k) const noexcept {
        return (static_cast<std::size_t>(i) * (spec_.np + 1) + j) * (spec_.nz + 1) + k;
    }
    GleGridSpec spec_;
    GleGridMetadata meta_;
    std::vector<double> psi_;
    std::vector<double> dzpsi_;
};

/// d[psi] = beta^{-1} / nu^2 * int |d_z psi|^2 dmu_GLE by tensor trapezoid over the grid nodes.
double compute_d_gle(const GleGridCV& grid, const Potential1D& potential, double nu, double beta);

}  // namespace cvdiff
