#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "eotlab/density.hpp"
#include "eotlab/error.hpp"

namespace eotlab::cli {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, Entry>;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string num_list(const std::vector<double>& xs) {
  std::string out;
  for (double x : xs) out += (out.empty() ? "" : " ") + num(x);
  return out;
}

[[noreturn]] void invalid(const std::string& key, const Entry& e, const std::string& why) {
  throw Error(ErrorKind::Validation, "key '" + key + "' (line " + std::to_string(e.line) + "): " + why);
}

double to_double(const std::string& key, const Entry& e, std::string_view token) {
  double x = 0.0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, x);
  if (ec != std::errc() || ptr != end || !std::isfinite(x)) invalid(key, e, "'" + std::string(token) + "' is not a number");
  return x;
}

std::vector<std::string> tokens(const std::string& value) {
  std::istringstream is(value);
  std::vector<std::string> out;
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

std::vector<double> to_list(const std::string& key, const Entry& e) {
  std::vector<double> out;
  for (const auto& t : tokens(e.value)) out.push_back(to_double(key, e, t));
  return out;
}

double to_single(const std::string& key, const Entry& e) {
  const auto xs = to_list(key, e);
  if (xs.size() != 1) invalid(key, e, "expected one number");
  return xs[0];
}

long to_integer(const std::string& key, const Entry& e) {
  const std::string v = trim(e.value);
  long x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) invalid(key, e, "'" + v + "' is not an integer");
  return x;
}

ConvexDomain to_domain(const std::string& key, const Entry& e) {
  try {
    return ConvexDomain::parse(e.value);
  } catch (const Error& err) {
    invalid(key, e, err.what());
  }
}

// "name p1 p2 ..." -> (name, params)
std::pair<std::string, std::vector<double>> to_named(const std::string& key, const Entry& e) {
  auto t = tokens(e.value);
  if (t.empty()) invalid(key, e, "missing name");
  std::vector<double> params;
  for (std::size_t k = 1; k < t.size(); ++k) params.push_back(to_double(key, e, t[k]));
  return {t[0], params};
}

bool is_auto(const Entry& e, const char* word) { return trim(e.value) == word; }

template <class Fn>
void apply(Section& section, const std::string& name, const std::string& key, Fn fn) {
  auto it = section.find(key);
  if (it == section.end()) return;
  fn(name + "." + key, it->second);
  section.erase(it);
}

void reject_rest(const Section& section, const std::string& name) {
  if (section.empty()) return;
  const auto& [key, e] = *section.begin();
  throw Error(ErrorKind::Validation, "unknown key '" + name + "." + key + "' (line " + std::to_string(e.line) + ")");
}

std::map<std::string, Section> split_sections(const std::string& text, std::set<std::string>& seen_sections) {
  static const std::set<std::string> known{"instance", "sweep", "output", "detach"};
  std::map<std::string, Section> out;
  std::istringstream is(text);
  std::string raw;
  std::string current;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    auto fail = [&](const std::string& why) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + why);
    };
    if (s.front() == '[') {
      if (s.back() != ']') fail("unterminated section header");
      current = trim(s.substr(1, s.size() - 2));
      if (!known.contains(current)) fail("unknown section [" + current + "]");
      if (!seen_sections.insert(current).second) fail("section [" + current + "] repeated");
      out[current];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    if (current.empty()) fail("key outside of any section");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) fail("empty key");
    if (value.empty()) fail("empty value for '" + key + "'");
    if (!out[current].emplace(key, Entry{value, line}).second) fail("duplicate key '" + key + "'");
  }
  return out;
}

void parse_instance(Section& sec, InstanceDefinition& inst) {
  const std::string name = "instance";
  if (auto it = sec.find("id"); it != sec.end()) {
    const std::string id = trim(it->second.value);
    if (id == "A" || id == "B" || id == "C" || id == "D") inst = builtin_instance(id);
    inst.id = id;
    sec.erase(it);
  }
  std::optional<std::pair<long, Entry>> dimension;
  apply(sec, name, "dimension", [&](const std::string&, const Entry& e) { dimension = {to_integer("instance.dimension", e), e}; });
  apply(sec, name, "source_domain", [&](const std::string& k, const Entry& e) { inst.source_domain = to_domain(k, e); });
  apply(sec, name, "target_domain", [&](const std::string& k, const Entry& e) { inst.target_domain = to_domain(k, e); });
  std::optional<Entry> src_entry;
  std::optional<Entry> dst_entry;
  apply(sec, name, "source_density", [&](const std::string& k, const Entry& e) {
    std::tie(inst.source_density, inst.source_params) = to_named(k, e);
    src_entry = e;
  });
  apply(sec, name, "target_density", [&](const std::string& k, const Entry& e) {
    std::tie(inst.target_density, inst.target_params) = to_named(k, e);
    dst_entry = e;
  });
  apply(sec, name, "resolution", [&](const std::string& k, const Entry& e) {
    const long r = to_integer(k, e);
    if (r < 8) invalid(k, e, "resolution must be at least 8 (got " + std::to_string(r) + ")");
    inst.resolution = static_cast<int>(r);
  });
  reject_rest(sec, name);

  const int n = inst.source_domain.dimension();
  if (inst.target_domain.dimension() != n)
    throw Error(ErrorKind::Validation, "key 'instance.target_domain': dimension differs from source_domain");
  if (dimension && dimension->first != n)
    invalid("instance.dimension", dimension->second, "does not match the domain dimension " + std::to_string(n));
  auto check_density = [](const std::string& key, const std::optional<Entry>& e, const std::string& dname,
                          const std::vector<double>& params, const ConvexDomain& dom) {
    try {
      (void)make_density(dname, params, dom);
    } catch (const Error& err) {
      if (e) invalid(key, *e, err.what());
      throw Error(ErrorKind::Validation, "key '" + key + "': " + err.what());
    }
  };
  check_density("instance.source_density", src_entry, inst.source_density, inst.source_params, inst.source_domain);
  check_density("instance.target_density", dst_entry, inst.target_density, inst.target_params, inst.target_domain);
}

void parse_sweep(Section& sec, ExperimentConfig& cfg) {
  const std::string name = "sweep";
  apply(sec, name, "epsilons", [&](const std::string& k, const Entry& e) {
    auto eps = to_list(k, e);
    if (eps.empty()) invalid(k, e, "empty list");
    std::sort(eps.begin(), eps.end(), std::greater<>());
    for (std::size_t i = 0; i < eps.size(); ++i) {
      if (!(eps[i] > 0.0)) invalid(k, e, "values must be positive");
      if (i > 0 && eps[i] == eps[i - 1]) invalid(k, e, "duplicate value " + num(eps[i]));
    }
    cfg.epsilons = std::move(eps);
  });
  apply(sec, name, "ps", [&](const std::string& k, const Entry& e) {
    auto ps = to_list(k, e);
    if (ps.empty()) invalid(k, e, "empty list");
    for (double p : ps)
      if (!(p >= 1.0)) invalid(k, e, "values must be at least 1");
    cfg.ps = std::move(ps);
  });
  apply(sec, name, "subset_margin", [&](const std::string& k, const Entry& e) {
    cfg.subset_margin = to_single(k, e);
    if (!(cfg.subset_margin > 0.0)) invalid(k, e, "must be positive");
  });
  apply(sec, name, "beta", [&](const std::string& k, const Entry& e) {
    if (is_auto(e, "auto")) {
      cfg.beta.reset();
      return;
    }
    const double b = to_single(k, e);
    if (!(b > 0.0 && b <= 1.0)) invalid(k, e, "must lie in (0, 1]");
    cfg.beta = b;
  });
  apply(sec, name, "cpt_window", [&](const std::string& k, const Entry& e) {
    if (is_auto(e, "none")) {
      cfg.cpt_window.reset();
      return;
    }
    const auto w = to_list(k, e);
    if (w.size() != 2 || !(w[0] < w[1])) invalid(k, e, "expected 'lo hi' with lo < hi");
    cfg.cpt_window = std::array<double, 2>{w[0], w[1]};
  });
  apply(sec, name, "tol", [&](const std::string& k, const Entry& e) {
    cfg.tol = to_single(k, e);
    if (!(cfg.tol > 0.0)) invalid(k, e, "must be positive");
  });
  apply(sec, name, "max_iter", [&](const std::string& k, const Entry& e) {
    cfg.max_iter = to_integer(k, e);
    if (cfg.max_iter < 1) invalid(k, e, "must be at least 1");
  });
  apply(sec, name, "seed", [&](const std::string& k, const Entry& e) {
    const long s = to_integer(k, e);
    if (s < 0) invalid(k, e, "must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(s);
  });
  reject_rest(sec, name);
  try {
    (void)shrink(cfg.instance.source_domain, cfg.subset_margin);
  } catch (const Error& err) {
    throw Error(ErrorKind::Validation, std::string("key 'sweep.subset_margin': ") + err.what());
  }
}

DetachConfig parse_detach(Section& sec) {
  const std::string name = "detach";
  DetachConfig d;
  apply(sec, name, "potential", [&](const std::string& k, const Entry& e) {
    std::tie(d.potential, d.potential_params) = to_named(k, e);
    if (d.potential != "quadratic" && d.potential != "power" && d.potential != "clamped-linear")
      invalid(k, e, "unknown potential '" + d.potential + "' (quadratic, power, clamped-linear)");
    if (d.potential_params.size() > 1) invalid(k, e, "at most one parameter");
    if (!d.potential_params.empty() && !(d.potential_params[0] > 0.0)) invalid(k, e, "parameter must be positive");
  });
  apply(sec, name, "domain", [&](const std::string& k, const Entry& e) { d.domain = to_domain(k, e); });
  apply(sec, name, "nodes", [&](const std::string& k, const Entry& e) {
    const long n = to_integer(k, e);
    if (n < 8) invalid(k, e, "must be at least 8");
    d.nodes = static_cast<int>(n);
  });
  apply(sec, name, "kernel", [&](const std::string& k, const Entry& e) { d.kernel = to_domain(k, e); });
  apply(sec, name, "p", [&](const std::string& k, const Entry& e) {
    d.p = to_single(k, e);
    if (!(d.p >= 2.0)) invalid(k, e, "must be at least 2");
  });
  apply(sec, name, "alpha", [&](const std::string& k, const Entry& e) {
    d.alpha = to_single(k, e);
    if (!(d.alpha > 0.0 && d.alpha <= 1.0)) invalid(k, e, "must lie in (0, 1]");
  });
  apply(sec, name, "lambda", [&](const std::string& k, const Entry& e) {
    if (is_auto(e, "auto")) {
      d.lambda.reset();
      return;
    }
    const double l = to_single(k, e);
    if (!(l > 0.0)) invalid(k, e, "must be positive");
    d.lambda = l;
  });
  apply(sec, name, "ball_domain", [&](const std::string& k, const Entry& e) {
    if (is_auto(e, "none")) {
      d.ball_domain.reset();
      return;
    }
    d.ball_domain = to_domain(k, e);
  });
  apply(sec, name, "ball_threshold", [&](const std::string& k, const Entry& e) { d.ball_threshold = to_single(k, e); });
  apply(sec, name, "z_samples", [&](const std::string& k, const Entry& e) {
    const long n = to_integer(k, e);
    if (n < 16) invalid(k, e, "must be at least 16");
    d.z_samples = static_cast<int>(n);
  });
  apply(sec, name, "r_samples", [&](const std::string& k, const Entry& e) {
    const long n = to_integer(k, e);
    if (n < 16) invalid(k, e, "must be at least 16");
    d.r_samples = static_cast<int>(n);
  });
  apply(sec, name, "qmc_points", [&](const std::string& k, const Entry& e) {
    d.qmc_points = to_integer(k, e);
    if (d.qmc_points < 1) invalid(k, e, "must be positive");
  });
  reject_rest(sec, name);
  if (d.kernel.dimension() != d.domain.dimension())
    throw Error(ErrorKind::Validation, "key 'detach.kernel': dimension differs from detach.domain");
  return d;
}

bool same_domain(const ConvexDomain& a, const ConvexDomain& b) { return a.describe() == b.describe(); }

}  // namespace

bool DetachConfig::operator==(const DetachConfig& o) const {
  const bool balls = ball_domain.has_value() == o.ball_domain.has_value() &&
                     (!ball_domain || same_domain(*ball_domain, *o.ball_domain));
  return potential == o.potential && potential_params == o.potential_params && same_domain(domain, o.domain) &&
         nodes == o.nodes && same_domain(kernel, o.kernel) && p == o.p && alpha == o.alpha && lambda == o.lambda &&
         balls && ball_threshold == o.ball_threshold && z_samples == o.z_samples && r_samples == o.r_samples &&
         qmc_points == o.qmc_points;
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  const auto& a = instance;
  const auto& b = o.instance;
  const bool inst = a.id == b.id && same_domain(a.source_domain, b.source_domain) &&
                    same_domain(a.target_domain, b.target_domain) && a.source_density == b.source_density &&
                    a.source_params == b.source_params && a.target_density == b.target_density &&
                    a.target_params == b.target_params && a.resolution == b.resolution;
  return inst && epsilons == o.epsilons && ps == o.ps && subset_margin == o.subset_margin && beta == o.beta &&
         cpt_window == o.cpt_window && tol == o.tol && max_iter == o.max_iter && seed == o.seed &&
         output_dir == o.output_dir && detach == o.detach;
}

ExperimentConfig parse_config(const std::string& text) {
  std::set<std::string> seen;
  auto sections = split_sections(text, seen);
  ExperimentConfig cfg;
  cfg.instance = builtin_instance("A");
  parse_instance(sections["instance"], cfg.instance);
  parse_sweep(sections["sweep"], cfg);
  Section& out = sections["output"];
  apply(out, "output", "dir", [&](const std::string&, const Entry& e) { cfg.output_dir = e.value; });
  reject_rest(out, "output");
  if (seen.contains("detach")) cfg.detach = parse_detach(sections["detach"]);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize(const ExperimentConfig& c) {
  std::ostringstream os;
  const auto& in = c.instance;
  auto density = [](const std::string& name, const std::vector<double>& params) {
    return params.empty() ? name : name + " " + num_list(params);
  };
  os << "[instance]\n"
     << "id = " << in.id << '\n'
     << "dimension = " << in.dimension() << '\n'
     << "source_domain = " << in.source_domain.describe() << '\n'
     << "target_domain = " << in.target_domain.describe() << '\n'
     << "source_density = " << density(in.source_density, in.source_params) << '\n'
     << "target_density = " << density(in.target_density, in.target_params) << '\n'
     << "resolution = " << in.resolution << "\n\n";
  os << "[sweep]\n"
     << "epsilons = " << num_list(c.epsilons) << '\n'
     << "ps = " << num_list(c.ps) << '\n'
     << "subset_margin = " << num(c.subset_margin) << '\n'
     << "beta = " << (c.beta ? num(*c.beta) : "auto") << '\n'
     << "cpt_window = " << (c.cpt_window ? num((*c.cpt_window)[0]) + " " + num((*c.cpt_window)[1]) : "none") << '\n'
     << "tol = " << num(c.tol) << '\n'
     << "max_iter = " << c.max_iter << '\n'
     << "seed = " << c.seed << "\n\n";
  os << "[output]\n"
     << "dir = " << c.output_dir << '\n';
  if (c.detach) {
    const auto& d = *c.detach;
    os << "\n[detach]\n"
       << "potential = " << density(d.potential, d.potential_params) << '\n'
       << "domain = " << d.domain.describe() << '\n'
       << "nodes = " << d.nodes << '\n'
       << "kernel = " << d.kernel.describe() << '\n'
       << "p = " << num(d.p) << '\n'
       << "alpha = " << num(d.alpha) << '\n'
       << "lambda = " << (d.lambda ? num(*d.lambda) : "auto") << '\n'
       << "ball_domain = " << (d.ball_domain ? d.ball_domain->describe() : "none") << '\n'
       << "ball_threshold = " << num(d.ball_threshold) << '\n'
       << "z_samples = " << d.z_samples << '\n'
       << "r_samples = " << d.r_samples << '\n'
       << "qmc_points = " << d.qmc_points << '\n';
  }
  return os.str();
}

}  // namespace eotlab::cli
