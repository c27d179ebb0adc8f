#include "ttmr/tt_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

namespace ttmr {

TTTensor::TTTensor(std::vector<DenseTensor> cores) : cores_(std::move(cores)) { validate(); }

void TTTensor::validate() const {
    if (cores_.empty()) throw std::invalid_argument("TTTensor: no cores");
    for (std::size_t k = 0; k < cores_.size(); ++k) {
        if (cores_[k].order() != 3) throw std::invalid_argument("TTTensor: core " + std::to_string(k) + " is not order 3");
        if (k > 0 && cores_[k].dim(0) != cores_[k - 1].dim(2))
            throw std::invalid_argument("TTTensor: rank mismatch between cores " + std::to_string(k - 1) + " and " +
                                        std::to_string(k));
    }
    if (cores_.front().dim(0) != 1 || cores_.back().dim(2) != 1)
        throw std::invalid_argument("TTTensor: boundary ranks must be 1");
}

Shape TTTensor::dims() const {
    Shape s;
    for (const auto& c : cores_) s.push_back(c.dim(1));
    return s;
}

std::vector<std::size_t> TTTensor::ranks() const {
    std::vector<std::size_t> r{1};
    for (const auto& c : cores_) r.push_back(c.dim(2));
    return r;
}

Matrix core_slice(const DenseTensor& core, std::size_t s) {
    const std::size_t r0 = core.dim(0), sd = core.dim(1), r1 = core.dim(2);
    Matrix m(r0, r1);
    for (std::size_t a = 0; a < r0; ++a)
        for (std::size_t b = 0; b < r1; ++b) m(a, b) = core[(a * sd + s) * r1 + b];
    return m;
}

Matrix core_unfold2(const DenseTensor& core) { return unfold(core, 1); }

DenseTensor core_from_theta(const Vector& theta, std::size_t r0, std::size_t s, std::size_t r1) {
    if (static_cast<std::size_t>(theta.size()) != r0 * s * r1)
        throw std::invalid_argument("core_from_theta: length mismatch");
    DenseTensor c({r0, s, r1});
    for (std::size_t j = 0; j < s; ++j)
        for (std::size_t a = 0; a < r0; ++a)
            for (std::size_t b = 0; b < r1; ++b) c[(a * s + j) * r1 + b] = theta((j * r0 + a) * r1 + b);
    return c;
}

Vector core_theta(const DenseTensor& core) { return vec(core_unfold2(core)); }

namespace {

std::size_t sat_mul(std::size_t a, std::size_t b) {
    if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) return std::numeric_limits<std::size_t>::max();
    return a * b;
}

}  // namespace

std::vector<std::size_t> clamp_ranks(const Shape& dims, std::size_t cap) {
    if (cap < 1) throw std::invalid_argument("clamp_ranks: cap must be >= 1");
    const std::size_t n = dims.size();
    std::vector<std::size_t> r(n + 1, 1);
    for (std::size_t k = 1; k < n; ++k) {
        std::size_t left = 1, right = 1;
        for (std::size_t i = 0; i < k; ++i) left = sat_mul(left, dims[i]);
        for (std::size_t i = k; i < n; ++i) right = sat_mul(right, dims[i]);
        r[k] = std::min({cap, left, right});
    }
    return r;
}

std::size_t param_count(const Shape& dims, const std::vector<std::size_t>& ranks) {
    std::size_t p = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) p += ranks[k] * dims[k] * ranks[k + 1];
    return p;
}

std::size_t param_count(const TTTensor& tt) { return param_count(tt.dims(), tt.ranks()); }

double evaluate_entry(const TTTensor& tt, const Index& idx) {
    if (idx.size() != tt.order()) throw std::invalid_argument("evaluate_entry: index length mismatch");
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(1);
    for (std::size_t k = 0; k < tt.order(); ++k) {
        if (idx[k] >= tt.core(k).dim(1)) throw std::out_of_range("evaluate_entry: index out of range");
        v = v * core_slice(tt.core(k), idx[k]);
    }
    return v(0);
}

namespace {

// Append core k to a left interface: out[(a,s), r] = sum_q in[a,q] G[q,s,r].
Matrix grow_left(const Matrix& in, const DenseTensor& g) {
    const std::size_t s = g.dim(1);
    Matrix out(in.rows() * static_cast<Eigen::Index>(s), g.dim(2));
    for (std::size_t j = 0; j < s; ++j) {
        const Matrix prod = in * core_slice(g, j);
        for (Eigen::Index a = 0; a < in.rows(); ++a) out.row(a * static_cast<Eigen::Index>(s) + j) = prod.row(a);
    }
    return out;
}

// Prepend core k to a right interface: out[(s,b), q] = sum_r G[q,s,r] in[b,r].
Matrix grow_right(const Matrix& in, const DenseTensor& g) {
    const std::size_t s = g.dim(1);
    Matrix out(static_cast<Eigen::Index>(s) * in.rows(), g.dim(0));
    for (std::size_t j = 0; j < s; ++j)
        out.middleRows(static_cast<Eigen::Index>(j) * in.rows(), in.rows()) = in * core_slice(g, j).transpose();
    return out;
}

}  // namespace

DenseTensor to_dense(const TTTensor& tt, std::size_t max_entries) {
    const Shape d = tt.dims();
    std::size_t total = 1;
    for (auto s : d) total = sat_mul(total, s);
    if (total > max_entries)
        throw std::length_error("to_dense: " + std::to_string(total) + " entries exceed guard of " +
                                std::to_string(max_entries));
    Matrix acc = Matrix::Ones(1, 1);
    for (std::size_t k = 0; k < tt.order(); ++k) acc = grow_left(acc, tt.core(k));
    return DenseTensor(d, std::vector<double>(acc.data(), acc.data() + acc.size()));
}

InterfacePair interfaces(const TTTensor& tt, std::size_t k) {
    if (k >= tt.order()) throw std::out_of_range("interfaces: core index out of range");
    InterfacePair p{Matrix::Ones(1, 1), Matrix::Ones(1, 1)};
    for (std::size_t j = 0; j < k; ++j) p.left = grow_left(p.left, tt.core(j));
    for (std::size_t j = tt.order(); j-- > k + 1;) p.right = grow_right(p.right, tt.core(j));
    return p;
}

Matrix left_gram(const TTTensor& tt, std::size_t k) {
    if (k >= tt.order()) throw std::out_of_range("left_gram: core index out of range");
    Matrix g = Matrix::Ones(1, 1);
    for (std::size_t j = 0; j < k; ++j) {
        const auto& c = tt.core(j);
        Matrix next = Matrix::Zero(c.dim(2), c.dim(2));
        for (std::size_t s = 0; s < c.dim(1); ++s) {
            const Matrix sl = core_slice(c, s);
            next.noalias() += sl.transpose() * g * sl;
        }
        g = std::move(next);
    }
    return g;
}

Matrix right_gram(const TTTensor& tt, std::size_t k) {
    if (k >= tt.order()) throw std::out_of_range("right_gram: core index out of range");
    Matrix g = Matrix::Ones(1, 1);
    for (std::size_t j = tt.order(); j-- > k + 1;) {
        const auto& c = tt.core(j);
        Matrix next = Matrix::Zero(c.dim(0), c.dim(0));
        for (std::size_t s = 0; s < c.dim(1); ++s) {
            const Matrix sl = core_slice(c, s);
            next.noalias() += sl * g * sl.transpose();
        }
        g = std::move(next);
    }
    return g;
}

TTTensor random_init(const Shape& dims, std::size_t cap, std::uint64_t seed) {
    if (dims.empty()) throw std::invalid_argument("random_init: no dimensions");
    const auto r = clamp_ranks(dims, cap);
    std::mt19937_64 rng(seed);
    std::vector<DenseTensor> cores;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        DenseTensor c({r[k], dims[k], r[k + 1]});
        const double delta = 1.0 / std::sqrt(static_cast<double>(c.size()));
        std::uniform_real_distribution<double> u(-delta, delta);
        for (auto& v : c.data()) v = u(rng);
        cores.push_back(std::move(c));
    }
    return TTTensor(std::move(cores));
}

void save_tt(const TTTensor& tt, std::ostream& os) {
    os << "ttmr-tt 1\n" << tt.order() << "\n";
    for (auto s : tt.dims()) os << s << ' ';
    os << "\n";
    for (auto r : tt.ranks()) os << r << ' ';
    os << "\n" << std::setprecision(17);
    for (const auto& c : tt.cores()) {
        for (std::size_t i = 0; i < c.size(); ++i) os << c[i] << (i + 1 == c.size() ? '\n' : ' ');
    }
}

TTTensor load_tt(std::istream& is) {
    std::string magic;
    int version = 0;
    std::size_t n = 0;
    if (!(is >> magic >> version) || magic != "ttmr-tt" || version != 1)
        throw std::runtime_error("load_tt: not a ttmr-tt v1 stream");
    if (!(is >> n) || n == 0) throw std::runtime_error("load_tt: bad order");
    Shape dims(n);
    std::vector<std::size_t> ranks(n + 1);
    for (auto& d : dims)
        if (!(is >> d)) throw std::runtime_error("load_tt: truncated dims");
    for (auto& r : ranks)
        if (!(is >> r)) throw std::runtime_error("load_tt: truncated ranks");
    std::vector<DenseTensor> cores;
    for (std::size_t k = 0; k < n; ++k) {
        DenseTensor c({ranks[k], dims[k], ranks[k + 1]});
        for (auto& v : c.data())
            if (!(is >> v)) throw std::runtime_error("load_tt: truncated core " + std::to_string(k));
        cores.push_back(std::move(c));
    }
    return TTTensor(std::move(cores));
}

void save_tt(const TTTensor& tt, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_tt: cannot open " + path);
    save_tt(tt, f);
}

TTTensor load_tt(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_tt: cannot open " + path);
    return load_tt(f);
}

}  // namespace ttmr
