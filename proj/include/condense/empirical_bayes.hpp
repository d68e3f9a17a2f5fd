#pragma once

#include "condense/dataset.hpp"
#include "condense/model.hpp"

#include "json.hpp"

#include <vector>

namespace condense {

struct EBReport {
    HyperParams raw_gamma;
    HyperParams clamped_gamma;
    KnBox kn;
    // One flag for beta, one per lambda component, one for tau2.
    bool beta_clamped = false;
    std::vector<bool> lambda_clamped;
    bool tau2_clamped = false;

    bool any_clamped() const;
};

// Growth constants of the default box; overridable from config.
struct KnBoxConstants {
    double c_l = 10.0;
    double b_exponent = 1.0;   // b in [log^{-a}, log^{a})
    double t2_lo_exponent = 1.0;
    double t2_hi_exponent = 2.0;
};

// Moment estimators: lambda = mean(y), tau2 = mean componentwise variance,
// beta = (alpha - 1) * 1.06 * sd * n^{-1/(d+4)} so that the IG prior mean of
// sigma is the rule-of-thumb bandwidth.
HyperParams estimate_hyperparams(const Dataset& data, double alpha_shape);

KnBox default_kn_box(std::size_t n, std::size_t d_y, const KnBoxConstants& constants = {});
// The same box written in terms of ln = log(n + e).
KnBox kn_box_at(double ln, const KnBoxConstants& constants = {});

// Projects each component onto its half-open interval. A violated bound is
// replaced by the point 1e-9 inside it.
EBReport clamp_to_kn(const HyperParams& gamma, const KnBox& kn);

nlohmann::json to_json(const HyperParams& g);
nlohmann::json to_json(const KnBox& kn);
nlohmann::json to_json(const EBReport& report);
HyperParams hyperparams_from_json(const nlohmann::json& j);

} // namespace condense
