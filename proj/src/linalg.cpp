#include "khj/linalg.hpp"

#include <algorithm>

namespace khj {

bool lu_solve(DenseMatrix& A, std::vector<double>& b) {
    const std::size_t n = A.rows();
    if (A.cols() != n || b.size() != n)
        throw std::invalid_argument("lu_solve: shape mismatch");
    std::vector<std::size_t> piv(n);
    for (std::size_t i = 0; i < n; ++i)
        piv[i] = i;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(A(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            double v = std::abs(A(i, k));
            if (v > best) {
                best = v;
                p = i;
            }
        }
        if (best < 1e-300)
            return false;
        if (p != k) {
            double* rk = A.row_ptr(k);
            double* rp = A.row_ptr(p);
            std::swap_ranges(rk, rk + n, rp);
            std::swap(b[k], b[p]);
        }
        const double pivot = A(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            double m = A(i, k) / pivot;
            if (m == 0.0)
                continue;
            A(i, k) = 0.0;
            double* ri = A.row_ptr(i);
            const double* rk = A.row_ptr(k);
            for (std::size_t j = k + 1; j < n; ++j)
                ri[j] -= m * rk[j];
            b[i] -= m * b[k];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        const double* ri = A.row_ptr(i);
        for (std::size_t j = i + 1; j < n; ++j)
            s -= ri[j] * b[j];
        b[i] = s / ri[i];
    }
    return true;
}

} // namespace khj
