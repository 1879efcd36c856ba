#ifndef KHJ_LINALG_HPP
#define KHJ_LINALG_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

namespace khj {

// Dense row-major matrix, just large enough for the per-solve Newton systems
// (a few hundred unknowns).
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double* row_ptr(std::size_t i) { return a_.data() + i * cols_; }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

// In-place LU solve with partial pivoting; returns false when the matrix is
// numerically singular.
bool lu_solve(DenseMatrix& A, std::vector<double>& b);

} // namespace khj

#endif
