#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ensemble/core.hpp"
#include "ensemble/errors.hpp"
#include "ensemble/prior.hpp"
#include "ensemble/rng.hpp"

namespace ensemble::models {

// Two-arm, two-stage design with sample size reassessment after stage 1:
// the per-arm stage-2 size is stage2_min when the observed stage-1 effect
// strictly exceeds theta_min, stage2_max otherwise.
struct TrialDesign {
    int stage1_size = 100;
    int stage2_min = 50;
    int stage2_max = 250;
    double theta_min = 0.16;
    Interval control_support{0.2, 0.7};
    Interval effect_support{-0.2, 0.3};

    void validate() const {
        if (stage1_size < 1 || stage2_min < 1 || stage2_max < 1) throw InvalidInput("trial: stage sizes must be >= 1");
        if (!(control_support.upper > control_support.lower) || !(effect_support.upper > effect_support.lower)) {
            throw InvalidInput("trial: empty parameter support");
        }
    }
};

struct StageCounts {
    int control_responders = 0;
    int treatment_responders = 0;
    int size = 0;  // per arm

    // Treatment minus control response rate.
    double delta() const {
        if (size <= 0) throw InvalidInput("trial: stage size must be positive");
        return static_cast<double>(treatment_responders - control_responders) / static_cast<double>(size);
    }
};

struct TrialDataset {
    StageCounts stage1;
    StageCounts stage2;

    void validate(const TrialDesign& design) const {
        for (const StageCounts* s : {&stage1, &stage2}) {
            if (s->size <= 0 || s->control_responders < 0 || s->treatment_responders < 0 ||
                s->control_responders > s->size || s->treatment_responders > s->size) {
                throw InvalidInput("trial: responder counts must lie in [0, size]");
            }
        }
        if (stage1.size != design.stage1_size) throw InvalidInput("trial: stage-1 size does not match the design");
        if (stage2.size != design.stage2_min && stage2.size != design.stage2_max) {
            throw InvalidInput("trial: stage-2 size must be stage2_min or stage2_max");
        }
    }
};

// Pure function of the stage-1 counts and the design constants.
inline int stage2_size(const TrialDesign& design, int control_responders, int treatment_responders) {
    const double observed = static_cast<double>(treatment_responders - control_responders) /
                            static_cast<double>(design.stage1_size);
    return observed > design.theta_min ? design.stage2_min : design.stage2_max;
}

// theta~(k) = k Delta1 + (1 - k) Delta2.
inline double trial_theta_tilde(const TrialDataset& d, double k) {
    if (!(k >= 0.0 && k <= 1.0)) throw InvalidInput("trial: k must lie in [0, 1]");
    return k * d.stage1.delta() + (1.0 - k) * d.stage2.delta();
}

// Pooled two-stage difference in rates. Biased under the adaptive rule.
inline double trial_pooled_naive(const TrialDataset& d) {
    const double n = static_cast<double>(d.stage1.size + d.stage2.size);
    if (!(n > 0.0)) throw InvalidInput("trial: stage sizes must be positive");
    return static_cast<double>(d.stage1.treatment_responders + d.stage2.treatment_responders) / n -
           static_cast<double>(d.stage1.control_responders + d.stage2.control_responders) / n;
}

inline double pooled_control_rate(const TrialDataset& d) {
    return static_cast<double>(d.stage1.control_responders + d.stage2.control_responders) /
           static_cast<double>(d.stage1.size + d.stage2.size);
}

// Pre-built binomial tables for one (theta1, theta) so repeated trials cost a
// handful of binary searches.
class TrialSampler {
public:
    TrialSampler(const TrialDesign& design, double control_rate, double effect) : design_(design) {
        design_.validate();
        const double treatment_rate = control_rate + effect;
        if (!(control_rate > 0.0 && control_rate < 1.0) || !(treatment_rate > 0.0 && treatment_rate < 1.0)) {
            throw InvalidInput("trial: response rates theta1 and theta1 + theta must lie in (0, 1)");
        }
        control1_ = BinomialTable(design_.stage1_size, control_rate);
        treatment1_ = BinomialTable(design_.stage1_size, treatment_rate);
        control_min_ = BinomialTable(design_.stage2_min, control_rate);
        treatment_min_ = BinomialTable(design_.stage2_min, treatment_rate);
        control_max_ = BinomialTable(design_.stage2_max, control_rate);
        treatment_max_ = BinomialTable(design_.stage2_max, treatment_rate);
    }

    TrialDataset operator()(Rng& rng) const {
        TrialDataset d;
        d.stage1.size = design_.stage1_size;
        d.stage1.control_responders = control1_.draw(rng);
        d.stage1.treatment_responders = treatment1_.draw(rng);
        d.stage2.size = stage2_size(design_, d.stage1.control_responders, d.stage1.treatment_responders);
        const bool small = d.stage2.size == design_.stage2_min;
        d.stage2.control_responders = (small ? control_min_ : control_max_).draw(rng);
        d.stage2.treatment_responders = (small ? treatment_min_ : treatment_max_).draw(rng);
        return d;
    }

private:
    TrialDesign design_;
    BinomialTable control1_, treatment1_, control_min_, treatment_min_, control_max_, treatment_max_;
};

inline TrialDataset trial_sample(double control_rate, double effect, const TrialDesign& design, std::uint64_t seed) {
    Rng rng(seed);
    return TrialSampler(design, control_rate, effect)(rng);
}

// phi = (theta1, theta): control response rate and treatment effect.
// T1 = theta~(0.5), T2 = Delta1, nuisance estimate = pooled control rate.
class AdaptiveTrial {
public:
    using Dataset = TrialDataset;

    explicit AdaptiveTrial(TrialDesign design = {}) : design_(design) { design_.validate(); }

    static constexpr const char* id() { return "adaptive-trial"; }
    const TrialDesign& design() const noexcept { return design_; }
    std::size_t param_dim() const noexcept { return 2; }
    std::size_t output_dim() const noexcept { return 1; }

    std::vector<Interval> support() const { return {design_.control_support, design_.effect_support}; }

    PriorSpec prior() const {
        return PriorSpec{{PriorCoordinate::continuous(design_.control_support),
                          PriorCoordinate::continuous(design_.effect_support)}};
    }

    TrialSampler sampler(const ParamPoint& phi) const {
        if (phi.size() != 2) throw InvalidInput("trial: phi must be (theta1, theta)");
        return TrialSampler(design_, phi[0], phi[1]);
    }

    EstimatorTriple triple(const Dataset& d) const {
        d.validate(design_);
        return {{trial_theta_tilde(d, 0.5)}, {d.stage1.delta()}, {pooled_control_rate(d)}};
    }

    // (theta1-hat, T1) in the (theta1, theta) order of phi.
    std::vector<double> network_input(const EstimatorTriple& t) const { return {t.omega_hat.at(0), t.t1.at(0)}; }

    std::vector<double> estimand(const ParamPoint& phi) const {
        if (phi.size() != 2) throw InvalidInput("trial: phi must be (theta1, theta)");
        return {phi[1]};
    }

private:
    TrialDesign design_;
};

}  // namespace ensemble::models
