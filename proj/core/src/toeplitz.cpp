#include "wifield/toeplitz.hpp"

#include <algorithm>
#include <climits>

#include <unsupported/Eigen/FFT>

#include "wifield/error.hpp"

namespace wifield {

GridWindow bounding_window(const std::vector<int>& cells, int n) {
  if (cells.empty()) {
    return {};
  }
  int r0 = INT_MAX, r1 = INT_MIN, c0 = INT_MAX, c1 = INT_MIN;
  for (int i : cells) {
    r0 = std::min(r0, i / n);
    r1 = std::max(r1, i / n);
    c0 = std::min(c0, i % n);
    c1 = std::max(c1, i % n);
  }
  return {r0, c0, r1 - r0 + 1, c1 - c0 + 1};
}

int fft_friendly_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int k = m;
    for (int p : {2, 3, 5}) {
      while (k % p == 0) {
        k /= p;
      }
    }
    if (k == 1) {
      return m;
    }
  }
}

struct ToeplitzConvolver::Impl {
  int fft_rows = 0;
  int fft_cols = 0;
  std::vector<cplx> kernel_hat;  // pre-scaled by 1 / (fft_rows * fft_cols)
  mutable Eigen::FFT<double> fft;
  mutable std::vector<cplx> work;
  mutable std::vector<cplx> line_in;
  mutable std::vector<cplx> line_out;

  Impl() { fft.SetFlag(Eigen::FFT<double>::Unscaled); }

  void rows_fwd(std::vector<cplx>& a, int first, int count, bool inverse) const {
    for (int r = first; r < first + count; ++r) {
      cplx* row = a.data() + static_cast<std::size_t>(r) * fft_cols;
      std::copy(row, row + fft_cols, line_in.begin());
      if (inverse) {
        fft.inv(line_out.data(), line_in.data(), fft_cols);
      } else {
        fft.fwd(line_out.data(), line_in.data(), fft_cols);
      }
      std::copy(line_out.begin(), line_out.begin() + fft_cols, row);
    }
  }

  void cols_fwd(std::vector<cplx>& a, bool inverse) const {
    for (int c = 0; c < fft_cols; ++c) {
      for (int r = 0; r < fft_rows; ++r) {
        line_in[static_cast<std::size_t>(r)] = a[static_cast<std::size_t>(r) * fft_cols + c];
      }
      if (inverse) {
        fft.inv(line_out.data(), line_in.data(), fft_rows);
      } else {
        fft.fwd(line_out.data(), line_in.data(), fft_rows);
      }
      for (int r = 0; r < fft_rows; ++r) {
        a[static_cast<std::size_t>(r) * fft_cols + c] = line_out[static_cast<std::size_t>(r)];
      }
    }
  }
};

ToeplitzConvolver::ToeplitzConvolver(const GreenTable& table, GridWindow source, GridWindow target)
    : source_(source), target_(target), impl_(std::make_unique<Impl>()) {
  if (source.size() <= 0 || target.size() <= 0) {
    throw ConfigError("toeplitz: empty window");
  }
  // Output (tr, tc) needs offsets tr - sr in [target.row0 - source.row0 - (source.rows-1),
  // target.row0 - source.row0 + target.rows - 1]; the circular length must cover that span.
  Impl& im = *impl_;
  im.fft_rows = fft_friendly_size(source.rows + target.rows - 1);
  im.fft_cols = fft_friendly_size(source.cols + target.cols - 1);
  const int dr0 = target.row0 - source.row0;
  const int dc0 = target.col0 - source.col0;
  const std::size_t total = static_cast<std::size_t>(im.fft_rows) * static_cast<std::size_t>(im.fft_cols);
  std::vector<cplx> kernel(total, cplx{});
  // Kernel sample at circular index (i, j) holds G for offset (dr0 + i', dc0 + j') where
  // i' in [-(source.rows-1), target.rows-1] is wrapped modulo fft_rows.
  for (int i = -(source.rows - 1); i < target.rows; ++i) {
    const int wi = (i % im.fft_rows + im.fft_rows) % im.fft_rows;
    for (int j = -(source.cols - 1); j < target.cols; ++j) {
      const int wj = (j % im.fft_cols + im.fft_cols) % im.fft_cols;
      kernel[static_cast<std::size_t>(wi) * im.fft_cols + wj] = table.at_offset(dr0 + i, dc0 + j);
    }
  }
  const std::size_t longest = static_cast<std::size_t>(std::max(im.fft_rows, im.fft_cols));
  im.line_in.assign(longest, cplx{});
  im.line_out.assign(longest, cplx{});
  im.rows_fwd(kernel, 0, im.fft_rows, false);
  im.cols_fwd(kernel, false);
  const double scale = 1.0 / static_cast<double>(total);
  for (cplx& v : kernel) {
    v *= scale;
  }
  im.kernel_hat = std::move(kernel);
  im.work.assign(total, cplx{});
}

ToeplitzConvolver::~ToeplitzConvolver() = default;
ToeplitzConvolver::ToeplitzConvolver(ToeplitzConvolver&&) noexcept = default;
ToeplitzConvolver& ToeplitzConvolver::operator=(ToeplitzConvolver&&) noexcept = default;

void ToeplitzConvolver::apply(const VectorXc& in, VectorXc& out) const {
  if (in.size() != source_.size()) {
    throw ConfigError("toeplitz: input size does not match the source window");
  }
  const Impl& im = *impl_;
  std::fill(im.work.begin(), im.work.end(), cplx{});
  for (int r = 0; r < source_.rows; ++r) {
    for (int c = 0; c < source_.cols; ++c) {
      im.work[static_cast<std::size_t>(r) * im.fft_cols + c] = in[r * source_.cols + c];
    }
  }
  im.rows_fwd(im.work, 0, source_.rows, false);
  im.cols_fwd(im.work, false);
  for (std::size_t k = 0; k < im.work.size(); ++k) {
    im.work[k] *= im.kernel_hat[k];
  }
  im.cols_fwd(im.work, true);
  im.rows_fwd(im.work, 0, target_.rows, true);
  out.resize(target_.size());
  for (int r = 0; r < target_.rows; ++r) {
    for (int c = 0; c < target_.cols; ++c) {
      out[r * target_.cols + c] = im.work[static_cast<std::size_t>(r) * im.fft_cols + c];
    }
  }
}

}  // namespace wifield
