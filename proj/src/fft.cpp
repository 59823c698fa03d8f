#include "mwi/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

#include "mwi/errors.hpp"

namespace mwi {
namespace {

struct PlanKey {
  std::vector<int> shape;
  int sign;
  auto operator<=>(const PlanKey&) const = default;
};

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(const std::vector<int>& shape, int sign) {
    std::lock_guard lock(mutex_);
    PlanKey key{shape, sign};
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    std::size_t total = 1;
    for (int n : shape) total *= static_cast<std::size_t>(n);
    ComplexBuffer scratch(total);
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft(static_cast<int>(shape.size()), shape.data(), p, p,
                                   sign, FFTW_ESTIMATE);
    if (plan == nullptr) throw NumericalError("FFTW could not create a plan");
    plans_.emplace(std::move(key), plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

void fft_inplace(ComplexBuffer& data, std::span<const std::size_t> shape,
                 FftDirection direction) {
  std::vector<int> dims(shape.begin(), shape.end());
  std::size_t total = 1;
  for (std::size_t n : shape) total *= n;
  if (total != data.size()) throw ValidationError("fft_inplace: shape does not match data size");

  fftw_plan plan = cache().get(dims, direction == FftDirection::forward ? FFTW_FORWARD : FFTW_BACKWARD);
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, p, p);
}

}  // namespace mwi
