#pragma once

#include <cstdint>
#include <iterator>
#include <string>
#include <utility>
#include <vector>

#include "duality_bounds/linalg.hpp"

namespace duality_bounds {

/// Disjoint index blocks d_j covering {0, ..., dim-1}.
class DesignPartition {
 public:
  DesignPartition(Eigen::Index dim, std::vector<std::vector<Eigen::Index>> blocks);

  /// J contiguous blocks; the first dim % J blocks get one extra index.
  static DesignPartition contiguous(Eigen::Index dim, int num_blocks);

  Eigen::Index dim() const { return dim_; }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  const std::vector<Eigen::Index>& block(int j) const { return blocks_.at(j); }
  const std::vector<std::vector<Eigen::Index>>& blocks() const { return blocks_; }
  int block_of(Eigen::Index i) const { return owner_.at(i); }

  /// Diagonal 0/1 projector onto block j.
  ComplexMatrix projector(int j) const;

  /// Relative Frobenius mass of m outside the diagonal blocks.
  double off_block_mass(const ComplexMatrix& m) const;

 private:
  Eigen::Index dim_;
  std::vector<std::vector<Eigen::Index>> blocks_;
  std::vector<int> owner_;
};

/// Binary design rho in {0,1}^J.
class Design {
 public:
  Design() = default;
  explicit Design(std::vector<std::uint8_t> rho);

  static Design all_zero(int num_blocks) {
    return Design(std::vector<std::uint8_t>(num_blocks, 0));
  }
  static Design all_one(int num_blocks) {
    return Design(std::vector<std::uint8_t>(num_blocks, 1));
  }
  /// Design number `index` in lexicographic order (rho[0] most significant).
  static Design from_index(std::uint64_t index, int num_blocks);
  /// Parses "0101".
  static Design from_string(const std::string& bits);

  int size() const { return static_cast<int>(rho_.size()); }
  bool operator[](int j) const { return rho_.at(j) != 0; }
  const std::vector<std::uint8_t>& bits() const { return rho_; }
  bool any() const;
  std::string to_string() const;

  friend bool operator==(const Design&, const Design&) = default;

 private:
  std::vector<std::uint8_t> rho_;
};

/// Toy linear scattering model: Green's function G, diagonal all-on potential
/// V, design partition, incident field s and the passivity margin.
///
/// Construction validates the block passivity condition (i D_j)^h > eps on
/// every block (D_j = V^{-1} restricted to d_j) and (i U)^h > eps for
/// U = V^{-1} - G; violations throw PassivityViolation.
class ScatteringProblem {
 public:
  ScatteringProblem(ComplexMatrix g, ComplexVector v_diagonal, DesignPartition partition,
                    ComplexVector s, double eps_passivity, std::uint64_t seed = 0);

  Eigen::Index dim() const { return g_.rows(); }
  int num_blocks() const { return partition_.num_blocks(); }
  const ComplexMatrix& G() const { return g_; }
  const ComplexVector& v_diagonal() const { return v_diag_; }
  ComplexMatrix V() const;
  ComplexMatrix Vinv() const;
  const DesignPartition& partition() const { return partition_; }
  const ComplexVector& s() const { return s_; }
  double eps_passivity() const { return eps_passivity_; }
  std::uint64_t seed() const { return seed_; }

  /// lambda_min((i U)^h); cached at construction.
  double resistive_lambda_min() const { return resistive_lambda_min_; }

 private:
  ComplexMatrix g_;
  ComplexVector v_diag_;
  DesignPartition partition_;
  ComplexVector s_;
  double eps_passivity_;
  std::uint64_t seed_;
  double resistive_lambda_min_ = 0.0;
};

/// Deterministic toy instance. G = c K + i gamma K^2 with K a seeded real
/// symmetric tridiagonal coupling matrix, 1/v = 1 - i*loss on every block and
/// a unit-norm seeded incident field.
ScatteringProblem build_toy_problem(Eigen::Index dim, int num_blocks, double loss,
                                    double coupling, std::uint64_t seed);

/// Exact polarization t for design rho: zero off the active blocks and
/// (V^{-1}_rr - G_rr) t_r = s_r on the active index set r.
ComplexVector solve_design(const ScatteringProblem& p, const Design& rho);

inline constexpr int kMaxEnumerationBlocks = 20;

/// Lazily enumerates all 2^J designs with their exact solutions, in
/// lexicographic order. Throws EnumerationCap when J > 20.
class DesignRange {
 public:
  using value_type = std::pair<Design, ComplexVector>;

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = DesignRange::value_type;
    using difference_type = std::ptrdiff_t;
    using pointer = const value_type*;
    using reference = const value_type&;

    iterator() = default;
    iterator(const ScatteringProblem* p, std::uint64_t index, std::uint64_t end);

    reference operator*() const { return current_; }
    pointer operator->() const { return &current_; }
    iterator& operator++();
    void operator++(int) { ++*this; }
    friend bool operator==(const iterator& a, const iterator& b) {
      return a.index_ == b.index_;
    }

   private:
    void load();
    const ScatteringProblem* p_ = nullptr;
    std::uint64_t index_ = 0;
    std::uint64_t end_ = 0;
    value_type current_;
  };

  explicit DesignRange(const ScatteringProblem& p);
  iterator begin() const { return iterator(p_, 0, count_); }
  iterator end() const { return iterator(p_, count_, count_); }
  std::uint64_t size() const { return count_; }

 private:
  const ScatteringProblem* p_;
  std::uint64_t count_;
};

DesignRange enumerate_designs(const ScatteringProblem& p);

struct BackgroundOperators {
  ComplexMatrix Vb;      // V on blocks active in b, zero elsewhere
  ComplexMatrix Vc;      // V on blocks inactive in b, zero elsewhere
  ComplexMatrix Wb_inv;  // I - Vb G
  ComplexMatrix Wc_inv;  // I - Vc G
};

BackgroundOperators background_operators(const ScatteringProblem& p, const Design& b);

/// U = V^{-1} - G, re-verifying (i U)^h > eps_passivity.
ComplexMatrix build_U(const ScatteringProblem& p);

}  // namespace duality_bounds
