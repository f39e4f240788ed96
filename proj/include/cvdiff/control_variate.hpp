#pragma once

#include <array>
#include <memory>
#include <string>

#include "cvdiff/grid_cv.hpp"

namespace cvdiff {

/// Control variate psi for the displacement along one direction of a D-dimensional
/// Langevin run: value, momentum gradient and the constant d[psi].
template <int D>
class ControlVariate {
public:
    using Point = std::array<double, D>;
    virtual ~ControlVariate() = default;
    virtual double value(const Point& q, const Point& p) const = 0;
    virtual Point grad_p(const Point& q, const Point& p) const = 0;
    virtual double d_psi() const = 0;
    virtual std::string source() const = 0;
    virtual bool is_zero() const { return false; }
};

template <int D>
class ZeroCV final : public ControlVariate<D> {
public:
    using Point = typename ControlVariate<D>::Point;
    double value(const Point&, const Point&) const override { return 0.0; }
    Point grad_p(const Point&, const Point&) const override { return Point{}; }
    double d_psi() const override { return 0.0; }
    std::string source() const override { return "none"; }
    bool is_zero() const override { return true; }
};

/// psi = c p_axis, so d[psi] = gamma c^2 / beta. With c = 1/gamma and V = 0 this
/// is the exact Poisson solution.
template <int D>
class LinearMomentumCV final : public ControlVariate<D> {
public:
    using Point = typename ControlVariate<D>::Point;
    LinearMomentumCV(double c, int axis, double gamma, double beta) : c_(c), axis_(axis), d_(gamma * c * c / beta) {}
    double value(const Point&, const Point& p) const override { return c_ * p[axis_]; }
    Point grad_p(const Point&, const Point&) const override {
        Point g{};
        g[axis_] = c_;
        return g;
    }
    double d_psi() const override { return d_; }
    std::string source() const override { return "linear"; }

private:
    double c_;
    int axis_;
    double d_;
};

/// Bilinear grid control variate for 1D runs.
class GridControlVariate final : public ControlVariate<1> {
public:
    explicit GridControlVariate(std::shared_ptr<const GridCV> grid) : grid_(std::move(grid)) {}
    double value(const Point& q, const Point& p) const override { return grid_->interpolate_psi(q[0], p[0]); }
    Point grad_p(const Point& q, const Point& p) const override { return {grid_->interpolate_dpsi(q[0], p[0])}; }
    double d_psi() const override { return grid_->d_psi(); }
    std::string source() const override { return grid_->metadata().source; }
    const GridCV& grid() const noexcept { return *grid_; }

private:
    std::shared_ptr<const GridCV> grid_;
};

/// psi(q, p) = psi_1D(q_axis, p_axis) for 2D runs.
class TensorizedControlVariate final : public ControlVariate<2> {
public:
    explicit TensorizedControlVariate(std::shared_ptr<const TensorizedGridCV> cv) : cv_(std::move(cv)) {}
    double value(const Point& q, const Point& p) const override { return cv_->value(q, p); }
    Point grad_p(const Point& q, const Point& p) const override { return cv_->grad_p(q, p); }
    double d_psi() const override { return cv_->d_psi(); }
    std::string source() const override { return "tensorized-" + cv_->grid().metadata().source; }

private:
    std::shared_ptr<const TensorizedGridCV> cv_;
};

/// Control variate for the GLE: psi(q, p, z) and d_z psi; the Ito term uses
/// d_z psi because the noise acts on z only.
class GleControlVariate {
public:
    virtual ~GleControlVariate() = default;
    virtual double value(double q, double p, double z) const = 0;
    virtual double grad_z(double q, double p, double z) const = 0;
    virtual double d_psi() const = 0;
    virtual std::string source() const = 0;
    virtual bool is_zero() const { return false; }
};

class GleZeroCV final : public GleControlVariate {
public:
    double value(double, double, double) const override { return 0.0; }
    double grad_z(double, double, double) const override { return 0.0; }
    double d_psi() const override { return 0.0; }
    std::string source() const override { return "none"; }
    bool is_zero() const override { return true; }
};

/// psi = a p + b z; d[psi] = b^2 / (beta nu^2).
class GleLinearCV final : public GleControlVariate {
public:
    GleLinearCV(double a, double b, double nu, double beta) : a_(a), b_(b), d_(b * b / (beta * nu * nu)) {}
    double value(double, double p, double z) const override { return a_ * p + b_ * z; }
    double grad_z(double, double, double) const override { return b_; }
    double d_psi() const override { return d_; }
    std::string source() const override { return "linear"; }

private:
    double a_, b_, d_;
};

class GleGridControlVariate final : public GleControlVariate {
public:
    GleGridControlVariate(std::shared_ptr<const GleGridCV> grid, double d_psi) : grid_(std::move(grid)), d_(d_psi) {}
    double value(double q, double p, double z) const override { return grid_->interpolate(q, p, z).psi; }
    double grad_z(double q, double p, double z) const override { return grid_->interpolate(q, p, z).dzpsi; }
    double d_psi() const override { return d_; }
    std::string source() const override { return grid_->metadata().source; }

private:
    std::shared_ptr<const GleGridCV> grid_;
    double d_;
};

}  // namespace cvdiff
