#pragma once

#include <cstddef>
#include <vector>

namespace poselift {

/// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Minimum-cost rectangular assignment (Kuhn-Munkres with shortest augmenting
/// paths, O(n^2 m)). Returns, per row, the assigned column or -1. Every row
/// is assigned when rows <= cols, every column otherwise.
/// Rows are inserted in index order and columns scanned in index order with
/// strict comparisons, so among equal-cost optima earlier indices win.
std::vector<int> solve_assignment(const Matrix& cost);

}  // namespace poselift
