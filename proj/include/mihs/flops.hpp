#pragma once

#include <array>
#include <cstdint>

namespace mihs {

enum class FlopCategory : int {
  Matvec = 0,        // solver-level products with A / A^T
  SketchBuild = 1,   // forming SA (sketch application)
  Subsolver = 2,     // everything inside aab_solve / exact sub-solves
  VectorOps = 3,     // axpy/momentum/scaling lines
  InnerProducts = 4, // dot products and norms outside the subsolver
};

inline constexpr int kNumFlopCategories = 5;

// Additive operation-count model. Multiplies and adds count separately
// (a fused multiply-add counts as 2). `total() == sum of categories` by
// construction and both are nondecreasing. `reductions()` counts global
// reductions (norms/dot products) as events, independent of their flop cost;
// it backs the structural "no hidden inner products" assertions.
class FlopCounter {
public:
  void charge(FlopCategory cat, std::uint64_t amount);
  void count_reduction(std::uint64_t events = 1) { reductions_ += events; }

  std::uint64_t total() const { return total_; }
  std::uint64_t category(FlopCategory cat) const {
    return categories_[static_cast<int>(cat)];
  }
  std::uint64_t reductions() const { return reductions_; }

  FlopCounter& operator+=(const FlopCounter& other);

private:
  std::uint64_t total_ = 0;
  std::array<std::uint64_t, kNumFlopCategories> categories_{};
  std::uint64_t reductions_ = 0;
};

// Free-function form of the charge operation.
void charge(FlopCounter& counter, FlopCategory cat, std::uint64_t amount);

} // namespace mihs
