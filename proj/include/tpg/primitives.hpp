#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace tpg {

/// Privately optimal retention from the subsidy alone: min(p/c, 1).
double floor_contribution(double c, double p);

/// Incremental cost of retaining d instead of the floor: (c d - p)^2 / (2c).
double gamma_star(double c, double p, double d);

/// Largest retention a user with cost c still prefers to the floor when
/// provision hinges on it: min(1, (p + sqrt(2 c V)) / c).
double max_fill(double c, double V, double p);

/// True when retaining d is individually rational for cost c on a provision
/// path, i.e. d <= max_fill(c, V, p) up to kEpsNum.
bool willing_to_retain(double c, double V, double p, double d);

class Infeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// min sum c_j e_j^2 / 2  s.t.  sum e_j = demand,  lower_j <= e_j <= upper_j.
struct WaterFillProblem {
    std::vector<double> costs;
    std::vector<double> lower;
    std::vector<double> upper;
    double demand = 0.0;
};

struct WaterFillResult {
    std::vector<double> allocation;
    /// Common exposure c_j e_j shared by every user strictly inside its bounds.
    double level = 0.0;
};

/// Solves the problem by bisection on the exposure level. Throws Infeasible
/// when demand lies outside [sum lower, sum upper].
WaterFillResult water_fill(const WaterFillProblem& problem);

}  // namespace tpg
