#pragma once

#include <complex>
#include <cstddef>
#include <cstdlib>
#include <new>
#include <span>
#include <vector>

namespace mwi {

using Complex = std::complex<double>;

/// Allocator returning 64-byte aligned storage so FFTW plans can use SIMD.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::size_t alignment = 64;

  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    std::size_t bytes = (n * sizeof(T) + alignment - 1) / alignment * alignment;
    if (void* p = std::aligned_alloc(alignment, bytes == 0 ? alignment : bytes)) {
      return static_cast<T*>(p);
    }
    throw std::bad_alloc();
  }
  void deallocate(T* p, std::size_t) noexcept { std::free(p); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

using ComplexBuffer = std::vector<Complex, AlignedAllocator<Complex>>;

enum class FftDirection { forward, backward };

/// Unnormalized in-place DFT of a row-major array with the given shape.
/// forward uses exp(-i...), backward exp(+i...). Plans are cached per shape
/// and the call is safe from multiple threads.
void fft_inplace(ComplexBuffer& data, std::span<const std::size_t> shape,
                 FftDirection direction);

}  // namespace mwi
