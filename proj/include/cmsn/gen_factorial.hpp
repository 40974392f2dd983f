#pragma once

#include <cstddef>
#include <vector>

namespace cmsn {

// Table of ln C(m,k;sigma), the central generalized factorial coefficients,
// filled by the triangular recurrence
//   C(m+1,k) = (m - k sigma) C(m,k) + sigma C(m,k-1),
// with C(0,0) = 1 and C(m,0) = 0 for m >= 1.  All entries with 1 <= k <= m
// are positive for sigma in (0,1), so logs are well defined.
class GenFactorialTable {
public:
    GenFactorialTable(double sigma, std::size_t m_max);

    double sigma() const { return sigma_; }
    std::size_t m_max() const { return m_max_; }

    // ln C(m,k;sigma); -inf where the coefficient vanishes
    double log_c(std::size_t m, std::size_t k) const;

private:
    double sigma_;
    std::size_t m_max_;
    std::vector<double> log_c_;  // row-major triangular, (m,k) with k <= m
};

}  // namespace cmsn
