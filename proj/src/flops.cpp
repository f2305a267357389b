#include "mihs/flops.hpp"

#include <limits>
#include <stdexcept>

namespace mihs {

void FlopCounter::charge(FlopCategory cat, std::uint64_t amount) {
  if (amount > std::numeric_limits<std::uint64_t>::max() - total_)
    throw std::overflow_error("FlopCounter: total would overflow");
  total_ += amount;
  categories_[static_cast<int>(cat)] += amount;
}

FlopCounter& FlopCounter::operator+=(const FlopCounter& other) {
  for (int c = 0; c < kNumFlopCategories; ++c)
    charge(static_cast<FlopCategory>(c), other.categories_[c]);
  reductions_ += other.reductions_;
  return *this;
}

void charge(FlopCounter& counter, FlopCategory cat, std::uint64_t amount) {
  counter.charge(cat, amount);
}

} // namespace mihs
