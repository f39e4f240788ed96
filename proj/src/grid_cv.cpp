#include "cvdiff/grid_cv.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "cvdiff/torus.hpp"

namespace cvdiff {

static_assert(std::endian::native == std::endian::little, "cache format is little-endian");

namespace {

constexpr char kGridMagic[8] = {'C', 'V', 'G', 'R', 'I', 'D', '0', '1'};
constexpr char kGleMagic[8] = {'C', 'V', 'G', 'L', 'E', '0', '0', '1'};

class ByteWriter {
public:
    template <class T>
    void put(const T& v) {
        char buf[sizeof(T)];
        std::memcpy(buf, &v, sizeof(T));
        out_.append(buf, sizeof(T));
    }
    void put_string(const std::string& s) {
        put(static_cast<std::uint32_t>(s.size()));
        out_.append(s);
    }
    void put_array(const std::vector<double>& v) {
        out_.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
    }
    void put_raw(const char* p, std::size_t n) { out_.append(p, n); }
    std::string take() { return std::move(out_); }

private:
    std::string out_;
};

class ByteReader {
public:
    explicit ByteReader(const std::string& bytes) : bytes_(bytes) {}
    template <class T>
    T get() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::string get_string() {
        const auto n = get<std::uint32_t>();
        need(n);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::vector<double> get_array(std::size_t count) {
        need(count * sizeof(double));
        std::vector<double> v(count);
        std::memcpy(v.data(), bytes_.data() + pos_, count * sizeof(double));
        pos_ += count * sizeof(double);
        return v;
    }
    void expect_magic(const char (&magic)[8]) {
        need(8);
        if (std::memcmp(bytes_.data() + pos_, magic, 8) != 0) throw std::runtime_error("bad cache file magic");
        pos_ += 8;
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) throw std::runtime_error("truncated cache file");
    }
    const std::string& bytes_;
    std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// Clamped cell lookup along a non-periodic axis with n cells on [-l, l].
// queries that land on a node (up to rounding) return the node value exactly
inline double snap_to_node(double s) {
    const double r = std::nearbyint(s);
    return std::abs(s - r) < 1e-9 ? r : s;
}

inline void locate_clamped(double x, double l, double inv_h, int n, int& j, double& t) {
    x = std::clamp(x, -l, l);
    double s = snap_to_node((x + l) * inv_h);
    j = static_cast<int>(std::floor(s));
    if (j >= n) j = n - 1;
    if (j < 0) j = 0;
    t = s - j;
}

}  // namespace

double GridSpec::dq() const { return kTwoPi / nq; }
double GridSpec::dp() const { return 2.0 * lp / np; }
double GridSpec::q_node(int i) const { return -kPi + kTwoPi * i / nq; }
double GridSpec::p_node(int j) const { return -lp + 2.0 * lp * j / np; }

void GridSpec::validate() const {
    if (nq < 2 || np < 1 || !(lp > 0.0)) throw std::invalid_argument("grid needs nq >= 2, np >= 1, lp > 0");
}

GridCV::GridCV(GridSpec spec, GridMetadata meta, std::vector<double> psi, std::vector<double> dpsi)
    : spec_(spec), meta_(std::move(meta)), psi_(std::move(psi)), dpsi_(std::move(dpsi)),
      d_psi_(std::numeric_limits<double>::quiet_NaN()) {
    spec_.validate();
    inv_dq_ = spec_.nq / kTwoPi;
    inv_dp_ = spec_.np / (2.0 * spec_.lp);
    const std::size_t n = static_cast<std::size_t>(spec_.nq) * (spec_.np + 1);
    if (psi_.size() != n || dpsi_.size() != n) throw std::invalid_argument("grid table size mismatch");
}

GridCV GridCV::tabulate(GridSpec spec, GridMetadata meta,
                        const std::function<std::pair<double, double>(double, double)>& f) {
    spec.validate();
    const std::size_t n = static_cast<std::size_t>(spec.nq) * (spec.np + 1);
    std::vector<double> psi(n), dpsi(n);
    for (int i = 0; i < spec.nq; ++i) {
        for (int j = 0; j <= spec.np; ++j) {
            const auto [v, d] = f(spec.q_node(i), spec.p_node(j));
            psi[static_cast<std::size_t>(i) * (spec.np + 1) + j] = v;
            dpsi[static_cast<std::size_t>(i) * (spec.np + 1) + j] = d;
        }
    }
    return GridCV(spec, std::move(meta), std::move(psi), std::move(dpsi));
}

GridCV::Cell GridCV::locate(double q, double p) const noexcept {
    double s = snap_to_node((wrap_to_torus(q) + kPi) * inv_dq_);
    int i = static_cast<int>(std::floor(s));
    if (i >= spec_.nq) i = spec_.nq - 1;
    if (i < 0) i = 0;
    const double tq = s - i;
    const int i1 = (i + 1 == spec_.nq) ? 0 : i + 1;  // q_{nq} aliases q_0
    int j;
    double tp;
    locate_clamped(p, spec_.lp, inv_dp_, spec_.np, j, tp);
    return {index(i, j), index(i1, j), index(i, j + 1), index(i1, j + 1), tq, tp};
}

GridCV::Sample GridCV::interpolate(double q, double p) const noexcept {
    const Cell c = locate(q, p);
    const double w00 = (1 - c.tq) * (1 - c.tp), w10 = c.tq * (1 - c.tp), w01 = (1 - c.tq) * c.tp, w11 = c.tq * c.tp;
    return {w00 * psi_[c.i00] + w10 * psi_[c.i10] + w01 * psi_[c.i01] + w11 * psi_[c.i11],
            w00 * dpsi_[c.i00] + w10 * dpsi_[c.i10] + w01 * dpsi_[c.i01] + w11 * dpsi_[c.i11]};
}

double GridCV::interpolate_psi(double q, double p) const noexcept {
    const Cell c = locate(q, p);
    return (1 - c.tq) * (1 - c.tp) * psi_[c.i00] + c.tq * (1 - c.tp) * psi_[c.i10] + (1 - c.tq) * c.tp * psi_[c.i01] +
           c.tq * c.tp * psi_[c.i11];
}

double GridCV::interpolate_dpsi(double q, double p) const noexcept {
    const Cell c = locate(q, p);
    return (1 - c.tq) * (1 - c.tp) * dpsi_[c.i00] + c.tq * (1 - c.tp) * dpsi_[c.i10] +
           (1 - c.tq) * c.tp * dpsi_[c.i01] + c.tq * c.tp * dpsi_[c.i11];
}

std::string GridCV::serialize() const {
    ByteWriter w;
    w.put_raw(kGridMagic, 8);
    w.put(static_cast<std::int64_t>(spec_.nq));
    w.put(static_cast<std::int64_t>(spec_.np));
    w.put(spec_.lp);
    w.put(meta_.beta);
    w.put(meta_.gamma);
    w.put_string(meta_.potential);
    w.put_string(meta_.source);
    w.put(d_psi_);
    w.put_array(psi_);
    w.put_array(dpsi_);
    return w.take();
}

GridCV GridCV::deserialize(const std::string& bytes) {
    ByteReader r(bytes);
    r.expect_magic(kGridMagic);
    GridSpec spec;
    spec.nq = static_cast<int>(r.get<std::int64_t>());
    spec.np = static_cast<int>(r.get<std::int64_t>());
    spec.lp = r.get<double>();
    spec.validate();
    GridMetadata meta;
    meta.beta = r.get<double>();
    meta.gamma = r.get<double>();
    meta.potential = r.get_string();
    meta.source = r.get_string();
    const double d = r.get<double>();
    const std::size_t n = static_cast<std::size_t>(spec.nq) * (spec.np + 1);
    auto psi = r.get_array(n);
    auto dpsi = r.get_array(n);
    if (!r.done()) throw std::runtime_error("trailing bytes in grid cache");
    GridCV grid(spec, std::move(meta), std::move(psi), std::move(dpsi));
    grid.set_d_psi(d);
    return grid;
}

void GridCV::save(const std::filesystem::path& path) const { write_file(path, serialize()); }

GridCV GridCV::load(const std::filesystem::path& path) { return deserialize(read_file(path)); }

namespace {

// Trapezoid weights over the grid p-nodes times the Gaussian factor.
std::vector<double> momentum_weights(const GridSpec& spec, double beta) {
    std::vector<double> w(spec.np + 1);
    for (int j = 0; j <= spec.np; ++j) {
        const double p = spec.p_node(j);
        w[j] = ((j == 0 || j == spec.np) ? 0.5 : 1.0) * std::exp(-0.5 * beta * p * p);
    }
    return w;
}

// int |d_p psi(q, p)|^2 kappa(dp) at fixed q, with the same weights.
double momentum_average(const GridCV& grid, const std::vector<double>& wp, double wp_sum, double q) {
    const GridSpec& spec = grid.spec();
    double acc = 0.0;
    for (int j = 0; j <= spec.np; ++j) {
        const double g = grid.interpolate_dpsi(q, spec.p_node(j));
        acc += wp[j] * g * g;
    }
    return acc / wp_sum;
}

}  // namespace

double compute_d(const GridCV& grid, const Potential1D& potential, double gamma, double beta, int q_nodes) {
    if (!(gamma > 0.0) || !(beta > 0.0)) throw std::invalid_argument("compute_d needs gamma, beta > 0");
    if (!potential.periodic()) throw std::invalid_argument("compute_d needs a periodic potential");
    const auto wp = momentum_weights(grid.spec(), beta);
    double wp_sum = 0.0;
    for (double w : wp) wp_sum += w;
    const double v0 = potential.min_value();
    double num = 0.0, den = 0.0;
    for (int m = 0; m < q_nodes; ++m) {
        const double q = -kPi + kTwoPi * m / q_nodes;
        const double wq = std::exp(-beta * (potential.eval(q) - v0));
        num += wq * momentum_average(grid, wp, wp_sum, q);
        den += wq;
    }
    return gamma / beta * num / den;
}

double compute_d_tensorized(const GridCV& grid, const Potential2D& potential, int axis, double gamma, double beta,
                            int q_nodes) {
    if (axis != 0 && axis != 1) throw std::invalid_argument("axis must be 0 or 1");
    if (!(gamma > 0.0) || !(beta > 0.0)) throw std::invalid_argument("compute_d needs gamma, beta > 0");
    const auto wp = momentum_weights(grid.spec(), beta);
    double wp_sum = 0.0;
    for (double w : wp) wp_sum += w;
    std::vector<double> nodes(q_nodes), marginal(q_nodes, 0.0);
    for (int m = 0; m < q_nodes; ++m) nodes[m] = -kPi + kTwoPi * m / q_nodes;
    // potential is symmetric in (q1, q2) only by assumption; keep the axis explicit
    double v0 = potential.eval(0.0, 0.0);
    for (int a = 0; a < q_nodes; ++a)
        for (int b = 0; b < q_nodes; ++b) v0 = std::min(v0, potential.eval(nodes[a], nodes[b]));
    for (int a = 0; a < q_nodes; ++a) {
        double acc = 0.0;
        for (int b = 0; b < q_nodes; ++b) {
            const double v = axis == 0 ? potential.eval(nodes[a], nodes[b]) : potential.eval(nodes[b], nodes[a]);
            acc += std::exp(-beta * (v - v0));
        }
        marginal[a] = acc;
    }
    double num = 0.0, den = 0.0;
    for (int a = 0; a < q_nodes; ++a) {
        num += marginal[a] * momentum_average(grid, wp, wp_sum, nodes[a]);
        den += marginal[a];
    }
    return gamma / beta * num / den;
}

TensorizedGridCV::TensorizedGridCV(std::shared_ptr<const GridCV> grid, const Potential2D& potential, int axis,
                                   double gamma, double beta, int q_nodes)
    : grid_(std::move(grid)), axis_(axis) {
    if (!grid_) throw std::invalid_argument("tensorized CV needs a grid");
    d_psi_ = compute_d_tensorized(*grid_, potential, axis, gamma, beta, q_nodes);
}

void GleGridSpec::validate() const {
    if (nq < 2 || np < 1 || nz < 1 || !(lp > 0.0) || !(lz > 0.0))
        throw std::invalid_argument("GLE grid needs nq >= 2, np, nz >= 1, lp, lz > 0");
}

GleGridCV::GleGridCV(GleGridSpec spec, GleGridMetadata meta, std::vector<double> psi, std::vector<double> dzpsi)
    : spec_(spec), meta_(std::move(meta)), psi_(std::move(psi)), dzpsi_(std::move(dzpsi)) {
    spec_.validate();
    const std::size_t n = static_cast<std::size_t>(spec_.nq) * (spec_.np + 1) * (spec_.nz + 1);
    if (psi_.size() != n || dzpsi_.size() != n) throw std::invalid_argument("GLE grid table size mismatch");
}

GleGridCV GleGridCV::tabulate(GleGridSpec spec, GleGridMetadata meta,
                              const std::function<std::pair<double, double>(double, double, double)>& f) {
    spec.validate();
    const std::size_t n = static_cast<std::size_t>(spec.nq) * (spec.np + 1) * (spec.nz + 1);
    std::vector<double> psi(n), dz(n);
    std::size_t idx = 0;
    for (int i = 0; i < spec.nq; ++i) {
        const double q = -kPi + kTwoPi * i / spec.nq;
        for (int j = 0; j <= spec.np; ++j) {
            const double p = -spec.lp + 2.0 * spec.lp * j / spec.np;
            for (int k = 0; k <= spec.nz; ++k, ++idx) {
                const double z = -spec.lz + 2.0 * spec.lz * k / spec.nz;
                std::tie(psi[idx], dz[idx]) = f(q, p, z);
            }
        }
    }
    return GleGridCV(spec, std::move(meta), std::move(psi), std::move(dz));
}

GleGridCV::Sample GleGridCV::interpolate(double q, double p, double z) const noexcept {
    double s = snap_to_node((wrap_to_torus(q) + kPi) / (kTwoPi / spec_.nq));
    int i = std::clamp(static_cast<int>(std::floor(s)), 0, spec_.nq - 1);
    const double tq = s - i;
    const int i1 = (i + 1 == spec_.nq) ? 0 : i + 1;
    int j, k;
    double tp, tz;
    locate_clamped(p, spec_.lp, spec_.np / (2.0 * spec_.lp), spec_.np, j, tp);
    locate_clamped(z, spec_.lz, spec_.nz / (2.0 * spec_.lz), spec_.nz, k, tz);
    Sample out{0.0, 0.0};
    for (int a = 0; a < 2; ++a) {
        const int ii = a ? i1 : i;
        const double wa = a ? tq : 1 - tq;
        for (int b = 0; b < 2; ++b) {
            const double wb = b ? tp : 1 - tp;
            for (int c = 0; c < 2; ++c) {
                const double w = wa * wb * (c ? tz : 1 - tz);
                const std::size_t idx = index(ii, j + b, k + c);
                out.psi += w * psi_[idx];
                out.dzpsi += w * dzpsi_[idx];
            }
        }
    }
    return out;
}

std::string GleGridCV::serialize() const {
    ByteWriter w;
    w.put_raw(kGleMagic, 8);
    w.put(static_cast<std::int64_t>(spec_.nq));
    w.put(static_cast<std::int64_t>(spec_.np));
    w.put(static_cast<std::int64_t>(spec_.nz));
    w.put(spec_.lp);
    w.put(spec_.lz);
    w.put(meta_.beta);
    w.put(meta_.gamma);
    w.put(meta_.nu);
    w.put_string(meta_.potential);
    w.put_string(meta_.source);
    w.put_array(psi_);
    w.put_array(dzpsi_);
    return w.take();
}

void GleGridCV::save(const std::filesystem::path& path) const { write_file(path, serialize()); }

GleGridCV GleGridCV::load(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    ByteReader r(bytes);
    r.expect_magic(kGleMagic);
    GleGridSpec spec;
    spec.nq = static_cast<int>(r.get<std::int64_t>());
    spec.np = static_cast<int>(r.get<std::int64_t>());
    spec.nz = static_cast<int>(r.get<std::int64_t>());
    spec.lp = r.get<double>();
    spec.lz = r.get<double>();
    spec.validate();
    GleGridMetadata meta;
    meta.beta = r.get<double>();
    meta.gamma = r.get<double>();
    meta.nu = r.get<double>();
    meta.potential = r.get_string();
    meta.source = r.get_string();
    const std::size_t n = static_cast<std::size_t>(spec.nq) * (spec.np + 1) * (spec.nz + 1);
    auto psi = r.get_array(n);
    auto dz = r.get_array(n);
    if (!r.done()) throw std::runtime_error("trailing bytes in GLE grid cache");
    return GleGridCV(spec, std::move(meta), std::move(psi), std::move(dz));
}

double compute_d_gle(const GleGridCV& grid, const Potential1D& potential, double nu, double beta) {
    if (!(nu > 0.0) || !(beta > 0.0)) throw std::invalid_argument("compute_d_gle needs nu, beta > 0");
    const GleGridSpec& s = grid.spec();
    const double v0 = potential.min_value();
    double num = 0.0, den = 0.0;
    for (int i = 0; i < s.nq; ++i) {
        const double q = -kPi + kTwoPi * i / s.nq;
        const double wq = std::exp(-beta * (potential.eval(q) - v0));
        for (int j = 0; j <= s.np; ++j) {
            const double p = -s.lp + 2.0 * s.lp * j / s.np;
            const double wp = ((j == 0 || j == s.np) ? 0.5 : 1.0) * std::exp(-0.5 * beta * p * p);
            for (int k = 0; k <= s.nz; ++k) {
                const double z = -s.lz + 2.0 * s.lz * k / s.nz;
                const double wz = ((k == 0 || k == s.nz) ? 0.5 : 1.0) * std::exp(-0.5 * beta * z * z);
                const double w = wq * wp * wz;
                const double g = grid.interpolate(q, p, z).dzpsi;
                num += w * g * g;
                den += w;
            }
        }
    }
    return num / den / (beta * nu * nu);
}

}  // namespace cvdiff
