#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

namespace anovaemu {

/// One input's distribution. Serves both as sampling law F_j and as base law G_j.
class Marginal {
public:
    virtual ~Marginal() = default;
    virtual double cdf(double x) const = 0;
    virtual double pdf(double x) const = 0;
    virtual double quantile(double u) const = 0;  // u in (0,1)
    virtual double lower() const = 0;
    virtual double upper() const = 0;
    virtual std::string kind() const = 0;
    virtual nlohmann::json to_json() const = 0;
};

using MarginalPtr = std::shared_ptr<const Marginal>;

MarginalPtr uniform_marginal(double lower, double upper);

/// Right-extension mixture base law: pdf = tau*rho on the base support plus
/// (1-tau)*rho' on the extension support. The extension must lie entirely to
/// the right of the base support.
MarginalPtr make_mixture(MarginalPtr base, double tau, MarginalPtr extension);

///// Convenience: mixture with a uniform extension of width
/// `extension_fraction * (base width)` attached at the base upper end.
/// The default fraction (1-tau)/tau makes the mixture density continuous for
/// a uniform base, so quantile transforms stay smooth (pass 0 for the default).
MarginalPtr make_default_mixture(MarginalPtr base, double tau,
                                 double extension_fraction = 0.0);

/// Factory from a JSON spec, e.g. {"kind":"uniform","lower":0,"upper":1}
/// or {"kind":"mixture","base":{...},"tau":0.9,"extension":{...}}.
MarginalPtr make_marginal(const nlohmann::json& spec);

}  // namespace anovaemu
