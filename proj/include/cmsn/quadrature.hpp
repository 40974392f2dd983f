#pragma once

#include <functional>

#include <Eigen/Dense>

#include "cmsn/errors.hpp"

namespace cmsn {

enum class Domain { Unit01, HalfLine, Sym11 };

// Tanh-sinh (double exponential) nodes and log-weights at a refinement level.
// Nodes are strictly interior to the open domain; weights are stored in log.
struct QuadratureRule {
    Domain domain;
    int level = 0;
    Eigen::ArrayXd nodes;
    Eigen::ArrayXd log_weights;
};

QuadratureRule tanh_sinh_rule(Domain domain, int level);

// ln integral of exp(f_log) over the rule's domain, by log-sum-exp over
// {log w_j + f_log(x_j)}.
double integrate_log(const std::function<double(double)>& f_log, const QuadratureRule& rule);

// Adaptive level doubling until two consecutive levels agree within `tol`
// (absolute, in log space) or the level cap is reached, in which case a
// NumericError carrying the last two estimates is thrown.
double integrate_log_adaptive(const std::function<double(double)>& f_log, Domain domain,
                              double tol = 1e-10, int max_level = 12);

// ln integral over the whole real line of exp(phi(u)) du, for quasi-concave
// phi with fast-decaying tails.  A coarse scan plus golden-section search
// locates the peak, the spacing is set from the local curvature, the range
// from a 95-nat tail search, and the midpoint grid is halved until two
// consecutive refinements agree within `tol`.  This is the workhorse for
// sharply peaked integrands whose width shrinks like m^{-1/2} in log
// coordinates, which outrun any fixed tanh-sinh level for large m.
double integrate_log_peaked(const std::function<double(double)>& phi, double tol = 1e-10);

}  // namespace cmsn
