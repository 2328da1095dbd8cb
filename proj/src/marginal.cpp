#include "anovaemu/marginal.hpp"

#include <cmath>
#include <stdexcept>

namespace anovaemu {

namespace {

class UniformMarginal final : public Marginal {
public:
    UniformMarginal(double a, double b) : a_(a), b_(b) {
        if (!(a < b)) throw std::invalid_argument("uniform marginal: lower must be < upper");
        if (!std::isfinite(a) || !std::isfinite(b))
            throw std::invalid_argument("uniform marginal: bounds must be finite");
    }
    double cdf(double x) const override {
        if (x <= a_) return 0.0;
        if (x >= b_) return 1.0;
        return (x - a_) / (b_ - a_);
    }
    double pdf(double x) const override {
        return (x > a_ && x < b_) ? 1.0 / (b_ - a_) : 0.0;
    }
    double quantile(double u) const override {
        if (!(u > 0.0 && u < 1.0))
            throw std::invalid_argument("quantile: u must be in (0,1)");
        return a_ + u * (b_ - a_);
    }
    double lower() const override { return a_; }
    double upper() const override { return b_; }
    std::string kind() const override { return "uniform"; }
    nlohmann::json to_json() const override {
        return {{"kind", "uniform"}, {"lower", a_}, {"upper", b_}};
    }

private:
    double a_, b_;
};

class MixtureMarginal final : public Marginal {
public:
    MixtureMarginal(MarginalPtr base, double tau, MarginalPtr ext)
        : base_(std::move(base)), ext_(std::move(ext)), tau_(tau) {}

    double cdf(double x) const override {
        if (x <= base_->upper()) return tau_ * base_->cdf(x);
        return tau_ + (1.0 - tau_) * ext_->cdf(x);
    }
    double pdf(double x) const override {
        if (x <= base_->upper()) return tau_ * base_->pdf(x);
        return (1.0 - tau_) * ext_->pdf(x);
    }
    double quantile(double u) const override {
        if (!(u > 0.0 && u < 1.0))
            throw std::invalid_argument("quantile: u must be in (0,1)");
        if (u <= tau_) {
            double uu = u / tau_;
            if (uu >= 1.0) return base_->upper();
            return base_->quantile(uu);
        }
        double uu = (u - tau_) / (1.0 - tau_);
        if (uu <= 0.0) return ext_->lower();
        return ext_->quantile(uu);
    }
    double lower() const override { return base_->lower(); }
    double upper() const override { return ext_->upper(); }
    std::string kind() const override { return "mixture"; }
    nlohmann::json to_json() const override {
        return {{"kind", "mixture"},
                {"tau", tau_},
                {"base", base_->to_json()},
                {"extension", ext_->to_json()}};
    }

private:
    MarginalPtr base_;
    MarginalPtr ext_;
    double tau_;
};

}  // namespace

MarginalPtr uniform_marginal(double lower, double upper) {
    return std::make_shared<UniformMarginal>(lower, upper);
}

MarginalPtr make_mixture(MarginalPtr base, double tau, MarginalPtr extension) {
    if (!base || !extension) throw std::invalid_argument("mixture: null marginal");
    if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("mixture: tau must be in (0,1]");
    if (tau == 1.0) return base;  // degenerate mixture equals the base law
    if (extension->lower() < base->upper() && extension->upper() > base->lower())
        throw std::invalid_argument("mixture: extension support overlaps the base support");
    if (extension->upper() <= base->lower())
        throw std::invalid_argument("mixture: extension must lie to the right of the base support");
    return std::make_shared<MixtureMarginal>(std::move(base), tau, std::move(extension));
}

MarginalPtr make_default_mixture(MarginalPtr base, double tau, double extension_fraction) {
    if (!base) throw std::invalid_argument("mixture: null marginal");
    if (tau == 1.0) return base;
    if (extension_fraction <= 0.0) extension_fraction = (1.0 - tau) / tau;
    const double width = base->upper() - base->lower();
    auto ext = uniform_marginal(base->upper(), base->upper() + extension_fraction * width);
    return make_mixture(std::move(base), tau, std::move(ext));
}

MarginalPtr make_marginal(const nlohmann::json& spec) {
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "uniform") {
        return uniform_marginal(spec.at("lower").get<double>(), spec.at("upper").get<double>());
    }
    if (kind == "mixture") {
        return make_mixture(make_marginal(spec.at("base")), spec.at("tau").get<double>(),
                            make_marginal(spec.at("extension")));
    }
    throw std::invalid_argument("make_marginal: unknown kind '" + kind + "'");
}

}  // namespace anovaemu
