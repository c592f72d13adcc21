#include "poselift/assignment.hpp"

#include <algorithm>
#include <limits>

namespace poselift {

namespace {

// Requires rows <= cols. Returns row -> column.
std::vector<int> solve_wide(const Matrix& a) {
    const std::size_t n = a.rows, m = a.cols;
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    std::vector<char> used(m + 1);

    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> row_to_col(n, -1);
    for (std::size_t j = 1; j <= m; ++j)
        if (p[j] != 0) row_to_col[p[j] - 1] = static_cast<int>(j - 1);
    return row_to_col;
}

}  // namespace

std::vector<int> solve_assignment(const Matrix& cost) {
    if (cost.rows == 0 || cost.cols == 0) return std::vector<int>(cost.rows, -1);
    if (cost.rows <= cost.cols) return solve_wide(cost);

    Matrix t(cost.cols, cost.rows);
    for (std::size_t r = 0; r < cost.rows; ++r)
        for (std::size_t c = 0; c < cost.cols; ++c) t(c, r) = cost(r, c);
    const auto col_to_row = solve_wide(t);
    std::vector<int> row_to_col(cost.rows, -1);
    for (std::size_t c = 0; c < col_to_row.size(); ++c)
        if (col_to_row[c] >= 0) row_to_col[static_cast<std::size_t>(col_to_row[c])] = static_cast<int>(c);
    return row_to_col;
}

}  // namespace poselift
