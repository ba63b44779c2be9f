#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "eotlab/detachment.hpp"
#include "eotlab/error.hpp"
#include "eotlab/estimates.hpp"
#include "eotlab/potentials.hpp"

namespace fs = std::filesystem;

namespace eotlab::cli {

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string point_text(std::span<const double> z) {
  std::string out;
  for (double c : z) out += (out.empty() ? "" : " ") + num(c);
  return out;
}

template <class Fn>
int guarded(std::ostream& err, Fn fn) {
  try {
    return fn();
  } catch (const NonConvergenceError& e) {
    err << "eotlab: " << e.what() << '\n';
  } catch (const Error& e) {
    err << "eotlab: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "eotlab: unexpected failure: " << e.what() << '\n';
  }
  return kExecutionError;
}

std::string output_dir(const ExperimentConfig& config, const RunOptions& options) {
  const std::string dir = options.out_dir ? *options.out_dir : config.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create output directory '" + dir + "': " + ec.message());
  return dir;
}

SinkhornOptions solver_options(const ExperimentConfig& config, const RunOptions& options) {
  SinkhornOptions s;
  s.tol = config.tol;
  s.max_iter = config.max_iter;
  s.threads = std::max(1, options.threads);
  return s;
}

double spectral_norm(const Eigen::MatrixXd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

struct NamedPotential {
  std::function<double(std::span<const double>)> value;
  GradientFn gradient;
};

NamedPotential named_potential(const DetachConfig& d) {
  const double param = d.potential_params.empty() ? -1.0 : d.potential_params[0];
  if (d.potential == "quadratic") {
    const double lam = param > 0.0 ? param : 1.0;
    return {[lam](std::span<const double> x) { return 0.5 * lam * dot(x, x); },
            [lam](std::span<const double> x) {
              Point g(x.begin(), x.end());
              for (double& c : g) c *= lam;
              return g;
            }};
  }
  if (d.potential == "power") {
    return {[](std::span<const double> x) { return 2.0 / 3.0 * std::pow(std::sqrt(dot(x, x)), 1.5); },
            [](std::span<const double> x) {
              const double r = std::sqrt(dot(x, x));
              Point g(x.begin(), x.end());
              for (double& c : g) c = r > 0.0 ? c / std::sqrt(r) : 0.0;
              return g;
            }};
  }
  const double c = param > 0.0 ? param : 0.5;
  return {[c](std::span<const double> x) {
            const double r = std::sqrt(dot(x, x));
            return r <= c ? 0.5 * r * r : c * r - 0.5 * c * c;
          },
          [c](std::span<const double> x) {
            const double r = std::sqrt(dot(x, x));
            Point g(x.begin(), x.end());
            if (r > c)
              for (double& v : g) v *= c / r;
            return g;
          }};
}

std::map<std::string, std::string> read_summary(const fs::path& path) {
  std::ifstream in(path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return kv;
}

std::string first_token(const std::string& s) {
  std::istringstream is(s);
  std::string t;
  is >> t;
  return t;
}

}  // namespace

void write_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + tmp + "'");
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "write to '" + tmp + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot move '" + tmp + "' to '" + path + "': " + ec.message());
}

int cmd_solve(const ExperimentConfig& config, const RunOptions& options, std::ostream& err) {
  return guarded(err, [&] {
    const auto [mu, nu] = build_instance(config.instance);
    const double eps = options.epsilon ? *options.epsilon : config.epsilons.back();
    if (!(eps > 0.0)) throw Error(ErrorKind::Parameter, "eps must be positive");
    const EntropicSolution sol = solve_schrodinger(mu, nu, eps, solver_options(config, options));
    const int n = mu->dimension();

    std::string csv = "side,node";
    for (int k = 0; k < n; ++k) csv += ",x" + std::to_string(k);
    csv += ",potential";
    for (int k = 0; k < n; ++k) csv += ",grad" + std::to_string(k);
    csv += ",hess_norm\n";
    auto emit = [&](const char* side, const DiscreteMarginal& m, const PotentialField& f, bool source) {
      for (std::size_t i = 0; i < m.size(); ++i) {
        const auto z = m.node(i);
        const auto c = source ? conditional_given_x(sol, z) : conditional_given_y(sol, z);
        csv += std::string(side) + "," + std::to_string(i);
        for (double x : z) csv += "," + num(x);
        csv += "," + num(f[i]);
        for (double g : c.mean) csv += "," + num(g);
        csv += "," + num(spectral_norm(c.covariance / eps)) + "\n";
      }
    };
    emit("mu", *mu, sol.u, true);
    emit("nu", *nu, sol.v, false);

    const std::string dir = output_dir(config, options);
    write_atomic((fs::path(dir) / "solution.csv").string(), csv);
    if (options.verbose) {
      err << "eps " << eps << ": " << sol.iterations << " iterations, marginal residual " << sol.marginal_residual
          << ", primal " << num(sol.primal_value) << ", dual + eps " << num(sol.dual_value + eps) << '\n';
    }
    return static_cast<int>(kOk);
  });
}

int cmd_sweep(const ExperimentConfig& config, const RunOptions& options, std::ostream& err) {
  return guarded(err, [&] {
    SweepOptions so;
    so.epsilons = config.epsilons;
    so.ps = config.ps;
    so.beta = config.beta;
    so.subset_margin = config.subset_margin;
    so.cpt_window = config.cpt_window;
    so.solver = solver_options(config, options);
    so.log = options.verbose ? &err : nullptr;
    const SweepReport report = run_sweep(config.instance, so);
    const auto checks = evaluate_checks(report);

    const std::string dir = output_dir(config, options);
    write_atomic((fs::path(dir) / "sweep.csv").string(), sweep_csv(report));
    write_atomic((fs::path(dir) / "summary.txt").string(), sweep_summary(report, checks));

    int code = kOk;
    for (const auto& c : checks) {
      if (c.passed) continue;
      err << "eotlab: check " << c.name << " failed: " << c.detail << '\n';
      code = kThresholdFailure;
    }
    return code;
  });
}

int cmd_detach(const ExperimentConfig& config, const RunOptions& options, std::ostream& err) {
  return guarded(err, [&] {
    if (!config.detach) throw Error(ErrorKind::Validation, "config has no [detach] section");
    const DetachConfig& d = *config.detach;
    const auto grid = uniform_grid(d.domain, d.nodes);
    const NamedPotential pot = named_potential(d);
    const auto u = PotentialField::from_function(grid, pot.value);

    std::vector<Point> grads(grid->size());
    for (std::size_t i = 0; i < grid->size(); ++i) grads[i] = pot.gradient(grid->node(i));
    const auto v = legendre_transform(u, gradient_image_grid(grads, d.nodes));

    std::string csv = "check,p,value,bound,worst_x,worst_y,samples,status\n";
    int code = kOk;
    auto row = [&](const std::string& check, double p, double value, double bound, std::span<const double> wx,
                   std::span<const double> wy, std::size_t samples, bool ok) {
      csv += check + "," + num(p) + "," + num(value) + "," + num(bound) + "," + point_text(wx) + "," +
             point_text(wy) + "," + std::to_string(samples) + "," + (ok ? "pass" : "fail") + "\n";
      if (!ok) {
        err << "eotlab: " << check << " check failed: value " << value << " vs bound " << bound << '\n';
        code = kThresholdFailure;
      }
    };

    const auto local = check_p_detachment(u, v, d.kernel, d.p, pot.gradient);
    row("local", local.p, local.best_L, 0.0, local.worst_x, local.worst_y, local.sample_count, local.best_L > 0.0);

    const double lambda = d.lambda ? *d.lambda : measure_lambda_h(u, d.alpha);
    const auto global = global_detachment_forward(u, d.alpha, lambda);
    row("global", global.certificate.p, global.certificate.best_L, 0.9 * global.predicted_L,
        global.certificate.worst_x, global.certificate.worst_y, global.certificate.sample_count, global.passed);
    if (options.verbose) {
      err << "local best_L " << num(local.best_L) << " over " << local.sample_count << " pairs; lambda " << num(lambda)
          << ", global best_L " << num(global.certificate.best_L) << " vs predicted " << num(global.predicted_L) << '\n';
    }

    if (d.ball_domain) {
      const auto q = static_cast<std::size_t>(d.qmc_points);
      const auto coarse = convex_ball_lower_bound(*d.ball_domain, d.z_samples, d.r_samples, q, config.seed);
      const auto fine = convex_ball_lower_bound(*d.ball_domain, d.z_samples, d.r_samples, 2 * q, config.seed);
      const double r1[] = {coarse.worst_r};
      const double r2[] = {fine.worst_r};
      row("ball", 0.0, coarse.min_ratio, d.ball_threshold, coarse.worst_z, r1, coarse.evaluations,
          coarse.min_ratio >= d.ball_threshold && coarse.min_ratio > 0.0);
      row("ball_refined", 0.0, fine.min_ratio, 0.9 * coarse.min_ratio, fine.worst_z, r2, fine.evaluations,
          std::abs(fine.min_ratio - coarse.min_ratio) <= 0.1 * coarse.min_ratio);
    }

    const std::string dir = output_dir(config, options);
    write_atomic((fs::path(dir) / "certificates.csv").string(), csv);
    return code;
  });
}

int cmd_report(const std::string& directory, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!fs::is_directory(directory)) throw Error(ErrorKind::Io, "'" + directory + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(directory))
      if (entry.is_regular_file() && entry.path().filename() == "summary.txt") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(ErrorKind::InsufficientData, "no summary.txt under '" + directory + "'");

    static const char* const kColumns[] = {"instance", "dimension", "alpha_hat", "beta"};
    static const char* const kFits[] = {"cpt_slope", "a_hat", "b_hat", "m_hat"};
    std::string csv = "instance,dimension,alpha_hat,beta,cpt_slope,a_hat,b_hat,m_hat,status,path\n";
    int code = kOk;
    for (const auto& file : files) {
      auto kv = read_summary(file);
      std::string line;
      for (const char* c : kColumns) line += first_token(kv[c]) + ",";
      for (const char* f : kFits) line += first_token(kv[std::string("fit.") + f]) + ",";
      const std::string status = kv["status"].empty() ? "unknown" : kv["status"];
      if (status != "pass") code = kThresholdFailure;
      line += status + "," + fs::relative(file, directory).generic_string();
      csv += line + "\n";
    }
    write_atomic((fs::path(directory) / "report.csv").string(), csv);
    out << csv;
    return code;
  });
}

}  // namespace eotlab::cli
