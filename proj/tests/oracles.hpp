#pragma once

// Naive reference implementations used as independent oracles in tests.

#include "ttmr/tensor.hpp"
#include "ttmr/tt_tensor.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using ttmr::Matrix;
using ttmr::Vector;

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
    std::normal_distribution<double> g;
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = g(rng);
    return m;
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n) { return random_matrix(rng, n, 1).col(0); }

inline ttmr::DenseTensor random_tensor(std::mt19937_64& rng, ttmr::Shape shape) {
    ttmr::DenseTensor t(shape);
    std::normal_distribution<double> g;
    for (auto& v : t.data()) v = g(rng);
    return t;
}

// Odometer over a shape, rightmost index fastest.
inline bool next_index(const ttmr::Shape& s, ttmr::Index& i) {
    for (std::size_t k = s.size(); k-- > 0;) {
        if (++i[k] < s[k]) return true;
        i[k] = 0;
    }
    return false;
}

// Flat offset by explicit weights w_k = prod_{j>k} I_j.
inline std::size_t offset(const ttmr::Shape& s, const ttmr::Index& i) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        std::size_t w = 1;
        for (std::size_t j = k + 1; j < s.size(); ++j) w *= s[j];
        off += i[k] * w;
    }
    return off;
}

// Random TT with arbitrary (not clamped) ranks.
inline ttmr::TTTensor random_tt(std::mt19937_64& rng, const ttmr::Shape& dims, const std::vector<std::size_t>& ranks) {
    std::vector<ttmr::DenseTensor> cores;
    for (std::size_t k = 0; k < dims.size(); ++k) cores.push_back(random_tensor(rng, {ranks[k], dims[k], ranks[k + 1]}));
    return ttmr::TTTensor(std::move(cores));
}

// Entry of a TT by explicit summation over every bond index.
inline double tt_entry_bruteforce(const ttmr::TTTensor& tt, const ttmr::Index& s) {
    const auto r = tt.ranks();
    ttmr::Shape bonds(r.begin() + 1, r.end() - 1);
    if (bonds.empty()) return tt.core(0)[s[0]];
    ttmr::Index b(bonds.size(), 0);
    double total = 0.0;
    do {
        double p = 1.0;
        for (std::size_t k = 0; k < tt.order(); ++k) {
            const std::size_t a = k == 0 ? 0 : b[k - 1];
            const std::size_t c = k + 1 == tt.order() ? 0 : b[k];
            p *= tt.core(k).at({a, s[k], c});
        }
        total += p;
    } while (next_index(bonds, b));
    return total;
}

// Model output for one sample: sum over all entries of W times prod_n phi_n[s_n].
inline double dense_predict(const ttmr::DenseTensor& w, const std::vector<Vector>& phi) {
    ttmr::Index i(w.order(), 0);
    double y = 0.0;
    do {
        double p = w.at(i);
        for (std::size_t k = 0; k < i.size(); ++k) p *= phi[k](static_cast<Eigen::Index>(i[k]));
        y += p;
    } while (next_index(w.shape(), i));
    return y;
}

inline Vector poly(double x, std::size_t s) {
    Vector v(static_cast<Eigen::Index>(s));
    for (std::size_t j = 0; j < s; ++j) v(static_cast<Eigen::Index>(j)) = std::pow(x, static_cast<double>(j));
    return v;
}

inline double rel_err(const Vector& a, const Vector& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

}  // namespace oracle
