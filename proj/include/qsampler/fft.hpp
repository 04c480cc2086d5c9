#ifndef QSAMPLER_FFT_HPP
#define QSAMPLER_FFT_HPP

#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <utility>

#include <fftw3.h>

#include "qsampler/linalg.hpp"

namespace qsampler::fft {

/// Batched, in-place, unnormalized DFT over every column of an N x M matrix.
///
/// Forward computes sum_j e^{-2 pi i jk/N} x_j, backward uses e^{+2 pi i jk/N}.
/// Plans are cached per (N, M, direction); planning is serialized because FFTW's
/// planner is not reentrant, execution is thread-safe.
class ColumnDft {
 public:
  ColumnDft(int rows, int cols, int sign) {
    std::lock_guard lock(planner_mutex());
    // FFTW_ESTIMATE leaves the scratch buffer untouched; UNALIGNED lets the plan
    // run on any Eigen buffer through the new-array execute interface.
    fftw_complex* scratch = fftw_alloc_complex(static_cast<std::size_t>(rows) * cols);
    int n[] = {rows};
    plan_ = fftw_plan_many_dft(1, n, cols, scratch, nullptr, 1, rows, scratch, nullptr, 1, rows,
                               sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    if (plan_ == nullptr) throw ContractViolation("fftw: planning failed");
  }
  ColumnDft(const ColumnDft&) = delete;
  ColumnDft& operator=(const ColumnDft&) = delete;
  ~ColumnDft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }

  void execute(ComplexMatrix& m) const {
    auto* data = reinterpret_cast<fftw_complex*>(m.data());
    fftw_execute_dft(plan_, data, data);
  }

  /// Shared plan for the given shape and direction.
  static const ColumnDft& get(int rows, int cols, int sign) {
    static std::mutex cache_mutex;
    static std::map<std::tuple<int, int, int>, std::unique_ptr<ColumnDft>> cache;
    std::lock_guard lock(cache_mutex);
    auto& slot = cache[{rows, cols, sign}];
    if (!slot) slot = std::make_unique<ColumnDft>(rows, cols, sign);
    return *slot;
  }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

  fftw_plan plan_ = nullptr;
};

inline void forward_columns(ComplexMatrix& m) {
  ColumnDft::get(static_cast<int>(m.rows()), static_cast<int>(m.cols()), FFTW_FORWARD).execute(m);
}

inline void backward_columns(ComplexMatrix& m) {
  ColumnDft::get(static_cast<int>(m.rows()), static_cast<int>(m.cols()), FFTW_BACKWARD).execute(m);
}

}  // namespace qsampler::fft

#endif  // QSAMPLER_FFT_HPP
