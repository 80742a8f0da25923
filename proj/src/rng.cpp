#include "bar/rng.hpp"

namespace bar {

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t replica) noexcept
    : key_(mix64(mix64(seed) ^ (replica * 0xd1b54a32d192ed03ULL))) {}

CounterRng::Step CounterRng::at(std::uint64_t step) const noexcept {
  return Step(mix64(key_ ^ (step * 0x8cb92ba72f3d8dd7ULL)));
}

CounterRng CounterRng::split(std::uint64_t stream) const noexcept {
  return CounterRng(FromKey{}, mix64(key_ + mix64(stream ^ 0xa0761d6478bd642fULL)));
}

std::uint64_t CounterRng::Step::bits(std::uint32_t node, std::uint32_t lane) const noexcept {
  const std::uint64_t site = (static_cast<std::uint64_t>(node) << 8) | lane;
  return mix64(key_ ^ mix64(site * 0x9fb21c651e98df25ULL));
}

double CounterRng::Step::uniform(std::uint32_t node, std::uint32_t lane) const noexcept {
  return to_unit(bits(node, lane));
}

std::uint64_t SeqRng::below(std::uint64_t n) noexcept {
  // Reject the partial top block so every residue is equally likely.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  for (;;) {
    const std::uint64_t r = rng_.at(counter_++).bits(0, CounterRng::kAux);
    if (r < limit) return r % n;
  }
}

}  // namespace bar
