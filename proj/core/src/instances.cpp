#include "eotlab/instances.hpp"

#include "eotlab/density.hpp"
#include "eotlab/error.hpp"

namespace eotlab {

InstanceMarginals build_instance(const InstanceDefinition& def) {
  if (def.source_domain.dimension() != def.target_domain.dimension())
    throw Error(ErrorKind::Parameter, "source and target domains differ in dimension");
  const auto f = make_density(def.source_density, def.source_params, def.source_domain);
  const auto g = make_density(def.target_density, def.target_params, def.target_domain);
  return {build_marginal(def.source_domain, f, def.resolution), build_marginal(def.target_domain, g, def.resolution)};
}

InstanceDefinition builtin_instance(const std::string& id, int resolution) {
  InstanceDefinition def;
  def.id = id;
  def.resolution = resolution > 0 ? resolution : 128;
  if (id == "A") return def;
  if (id == "B") {
    def.target_domain = ConvexDomain::box({{0.0, 2.0}});
    return def;
  }
  if (id == "C") {
    def.source_domain = ConvexDomain::box({{0.0, 1.0}, {0.0, 1.0}});
    def.target_domain = def.source_domain;
    def.resolution = resolution > 0 ? resolution : 12;
    return def;
  }
  if (id == "D") {
    def.source_density = "sine-perturbed";
    def.source_params = {0.3, 1.0};
    return def;
  }
  throw Error(ErrorKind::Parameter, "unknown built-in instance '" + id + "'");
}

}  // namespace eotlab
