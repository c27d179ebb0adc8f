#pragma once

#include "ttmr/tensor.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ttmr {

/// Tensor train. Core k has shape R_{k-1} x S_k x R_k with R_0 = R_N = 1.
class TTTensor {
public:
    TTTensor() = default;
    explicit TTTensor(std::vector<DenseTensor> cores);

    std::size_t order() const { return cores_.size(); }
    Shape dims() const;
    std::vector<std::size_t> ranks() const;

    DenseTensor& core(std::size_t k) { return cores_.at(k); }
    const DenseTensor& core(std::size_t k) const { return cores_.at(k); }
    const std::vector<DenseTensor>& cores() const { return cores_; }

    /// Replace a core; rank agreement with neighbours is the caller's business until validate().
    void set_core(std::size_t k, DenseTensor c) { cores_.at(k) = std::move(c); }
    void validate() const;

private:
    std::vector<DenseTensor> cores_;
};

/// Lateral slice G[:, s, :] as an R_{k-1} x R_k matrix.
Matrix core_slice(const DenseTensor& core, std::size_t s);
/// Mode-2 unfolding G_2 (S x R_{k-1}R_k); row-major vec of it is theta_k.
Matrix core_unfold2(const DenseTensor& core);
DenseTensor core_from_theta(const Vector& theta, std::size_t r0, std::size_t s, std::size_t r1);
Vector core_theta(const DenseTensor& core);

std::vector<std::size_t> clamp_ranks(const Shape& dims, std::size_t cap);
std::size_t param_count(const Shape& dims, const std::vector<std::size_t>& ranks);
std::size_t param_count(const TTTensor& tt);

double evaluate_entry(const TTTensor& tt, const Index& idx);
DenseTensor to_dense(const TTTensor& tt, std::size_t max_entries = 10'000'000);

struct InterfacePair {
    Matrix left;   // (S_1..S_{k-1}) x R_{k-1}
    Matrix right;  // (S_{k+1}..S_N) x R_k
};

InterfacePair interfaces(const TTTensor& tt, std::size_t k);

/// left^T left and right^T right via the slice recursion, without forming the interfaces.
Matrix left_gram(const TTTensor& tt, std::size_t k);
Matrix right_gram(const TTTensor& tt, std::size_t k);

TTTensor random_init(const Shape& dims, std::size_t cap, std::uint64_t seed);

void save_tt(const TTTensor& tt, std::ostream& os);
TTTensor load_tt(std::istream& is);
void save_tt(const TTTensor& tt, const std::string& path);
TTTensor load_tt(const std::string& path);

}  // namespace ttmr
