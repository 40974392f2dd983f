#include "cmsn/gen_factorial.hpp"

#include <cmath>
#include <stdexcept>

#include "cmsn/logspace.hpp"

namespace cmsn {

GenFactorialTable::GenFactorialTable(double sigma, std::size_t m_max)
    : sigma_(sigma), m_max_(m_max) {
    if (!(sigma > 0.0 && sigma < 1.0))
        throw std::invalid_argument("GenFactorialTable: sigma must lie in (0,1)");
    if (m_max < 1) throw std::invalid_argument("GenFactorialTable: m_max must be >= 1");

    auto idx = [](std::size_t m, std::size_t k) { return m * (m + 1) / 2 + k; };
    log_c_.assign((m_max + 1) * (m_max + 2) / 2, kNegInf);
    log_c_[idx(0, 0)] = 0.0;
    const double lsig = std::log(sigma);
    for (std::size_t m = 0; m < m_max; ++m) {
        for (std::size_t k = 1; k <= m + 1; ++k) {
            double carry = kNegInf;
            if (k <= m) {
                double cmk = log_c_[idx(m, k)];
                if (cmk != kNegInf)
                    carry = std::log(static_cast<double>(m) - k * sigma) + cmk;
            }
            double lift = (k >= 1) ? log_c_[idx(m, k - 1)] + lsig : kNegInf;
            log_c_[idx(m + 1, k)] = log_add(carry, lift);
        }
    }
}

double GenFactorialTable::log_c(std::size_t m, std::size_t k) const {
    if (m > m_max_ || k > m) return kNegInf;
    return log_c_[m * (m + 1) / 2 + k];
}

}  // namespace cmsn
