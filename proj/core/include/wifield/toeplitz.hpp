#pragma once

#include <memory>
#include <vector>

#include "wifield/greens.hpp"
#include "wifield/types.hpp"

namespace wifield {

/// Applies G_S between two rectangular windows of the grid by FFT convolution.
/// Window vectors are row-major h x w over [row0, row0+h) x [col0, col0+w).
struct GridWindow {
  int row0 = 0;
  int col0 = 0;
  int rows = 0;
  int cols = 0;

  int size() const { return rows * cols; }
  bool contains(int row, int col) const {
    return row >= row0 && row < row0 + rows && col >= col0 && col < col0 + cols;
  }
};

/// Smallest window covering the given cell indices of an n x n grid.
GridWindow bounding_window(const std::vector<int>& cells, int n);

class ToeplitzConvolver {
public:
  ToeplitzConvolver(const GreenTable& table, GridWindow source, GridWindow target);
  ~ToeplitzConvolver();
  ToeplitzConvolver(ToeplitzConvolver&&) noexcept;
  ToeplitzConvolver& operator=(ToeplitzConvolver&&) noexcept;

  /// out = G_S[target, source] * in.
  void apply(const VectorXc& in, VectorXc& out) const;

  const GridWindow& source() const { return source_; }
  const GridWindow& target() const { return target_; }

private:
  struct Impl;
  GridWindow source_;
  GridWindow target_;
  std::unique_ptr<Impl> impl_;
};

/// Smallest integer >= n whose only prime factors are 2, 3 and 5.
int fft_friendly_size(int n);

}  // namespace wifield
