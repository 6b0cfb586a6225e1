// Command-line surface of the sub-Finsler engine: load a manifold spec,
// integrate geodesics, evaluate exponential maps, estimate distances by
// shooting, and run the completeness / Hopf-Rinow probes. All floating-point
// output uses 17 significant digits so files round-trip doubles exactly.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "subfinsler/distance.hpp"
#include "subfinsler/spec_io.hpp"

using namespace subfinsler;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_vec(const Eigen::VectorXd& v) {
  std::string out = "[";
  for (int i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += fmt(v[i]);
  }
  return out + "]";
}

std::string fmt_growth(const std::vector<int>& growth) {
  std::string out = "[";
  for (std::size_t i = 0; i < growth.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(growth[i]);
  }
  return out + "]";
}

// Thrown for bad command-line values; mapped to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Eigen::VectorXd parse_point(const std::string& csv) {
  std::vector<double> vals;
  std::stringstream ss(csv);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(cell, &used));
      while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ConfigError("malformed coordinate list: '" + csv + "'");
    }
  }
  if (vals.empty()) throw ConfigError("empty coordinate list");
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<long>(vals.size()));
}

DomainBox parse_region(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos)
    throw ConfigError("region must be 'min1,min2,..:max1,max2,..'");
  DomainBox box{parse_point(text.substr(0, colon)), parse_point(text.substr(colon + 1))};
  if (box.min.size() != box.max.size())
    throw ConfigError("region min/max have different dimensions");
  return box;
}

void check_point(const ManifoldSpec& spec, const Eigen::VectorXd& pt, const char* what) {
  if (pt.size() != spec.dim())
    throw ConfigError(std::string(what) + " has dimension " + std::to_string(pt.size()) +
                      ", spec has dimension " + std::to_string(spec.dim()));
  if (!spec.in_domain(pt))
    throw ConfigError(std::string(what) + " lies outside the chart domain");
}

void emit(const std::string& text, const std::string& output_path) {
  std::fputs(text.c_str(), stdout);
  if (!output_path.empty()) {
    std::ofstream out(output_path, std::ios::binary);
    if (!out) throw ConfigError("cannot write output file: " + output_path);
    out << text;
  }
}

const char* status_name(FlowStatus s) {
  switch (s) {
    case FlowStatus::Completed: return "Completed";
    case FlowStatus::Escaped: return "Escaped";
    default: return "StepFailure";
  }
}

std::string geodesic_line(const GeodesicResult& r) {
  std::string out = r.status == GeodesicResult::Status::Reached ? "\"Reached\"" : "\"Unreached\"";
  return "{\"status\":" + out + ",\"length\":" + fmt(r.length) +
         ",\"residual\":" + fmt(r.residual) + ",\"p0\":" + fmt_vec(r.p0) + "}";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sub-Finsler geometry engine"};
  app.require_subcommand(1);

  std::string spec_path, output_path;
  std::uint64_t seed = 0;
  double tol = -1.0;  // command-specific default when negative

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--spec", spec_path, "manifold spec JSON file")->required();
    cmd->add_option("--seed", seed, "random seed (default 0)");
    cmd->add_option("--tol", tol, "primary tolerance of the command");
    cmd->add_option("--output", output_path, "also write stdout payload to this file");
  };

  // geodesic
  auto* geodesic = app.add_subcommand("geodesic", "integrate a normal extremal");
  std::string from_csv, p0_csv, v0_csv, to_csv;
  double T = 1.0, rel_tol = 1e-9, abs_tol = 1e-12;
  int samples = 129;
  add_common(geodesic);
  geodesic->add_option("--from", from_csv, "initial point")->required();
  geodesic->add_option("--p0", p0_csv, "initial covector")->required();
  geodesic->add_option("--T", T, "duration")->required();
  geodesic->add_option("--rel-tol", rel_tol, "integrator relative tolerance");
  geodesic->add_option("--abs-tol", abs_tol, "integrator absolute tolerance");
  geodesic->add_option("--samples", samples, "output samples (>= 2)");

  // exp
  auto* exp_cmd = app.add_subcommand("exp", "evaluate exp*_x(p) or exp_x(v)");
  add_common(exp_cmd);
  exp_cmd->add_option("--from", from_csv, "base point")->required();
  auto* opt_p0 = exp_cmd->add_option("--p0", p0_csv, "covector (exp*)");
  auto* opt_v0 = exp_cmd->add_option("--v0", v0_csv, "fiber velocity (exp)");
  opt_p0->excludes(opt_v0);

  // distance
  auto* distance = app.add_subcommand("distance", "estimate d(from, to) by shooting");
  int starts = 32, max_iters = 40, shells = 4;
  double max_radius = 0.0;
  bool require_reached = false;
  add_common(distance);
  distance->add_option("--from", from_csv, "start point")->required();
  distance->add_option("--to", to_csv, "target point")->required();
  distance->add_option("--starts", starts, "multi-start budget");
  distance->add_option("--shells", shells, "energy shell count");
  distance->add_option("--max-iters", max_iters, "Gauss-Newton iterations per start");
  distance->add_option("--max-radius", max_radius, "largest energy shell (0 = auto)");
  distance->add_flag("--require-reached", require_reached, "exit 1 unless Reached");

  // sphere
  auto* sphere = app.add_subcommand("sphere", "exp* image of a cotangent sphere");
  double radius = 1.0;
  int n_points = 64;
  add_common(sphere);
  sphere->add_option("--at", from_csv, "center point")->required();
  sphere->add_option("--r", radius, "sphere radius")->required();
  sphere->add_option("--n", n_points, "sample count");

  // check-bracket
  auto* bracket = app.add_subcommand("check-bracket", "growth vector at a point");
  int depth = 3;
  add_common(bracket);
  bracket->add_option("--at", from_csv, "evaluation point")->required();
  bracket->add_option("--depth", depth, "maximum bracket length");

  // probe-completeness
  auto* complete = app.add_subcommand("probe-completeness", "extendability of unit-energy extremals");
  int dirs = 16;
  double Tmax = 50.0;
  add_common(complete);
  complete->add_option("--at", from_csv, "base point")->required();
  complete->add_option("--dirs", dirs, "number of directions");
  complete->add_option("--Tmax", Tmax, "integration horizon");

  // probe-hopf-rinow
  auto* hopf = app.add_subcommand("probe-hopf-rinow", "minimizer/triangle/asymmetry probe");
  std::string region_text;
  int pairs = 20;
  add_common(hopf);
  hopf->add_option("--region", region_text, "sampling box 'min1,..:max1,..'")->required();
  hopf->add_option("--pairs", pairs, "number of sampled pairs");
  hopf->add_option("--starts", starts, "multi-start budget per shoot");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    ManifoldSpec spec = load_manifold_spec(spec_path);
    std::string out;

    if (app.got_subcommand(geodesic)) {
      Eigen::VectorXd x0 = parse_point(from_csv), p0 = parse_point(p0_csv);
      check_point(spec, x0, "--from");
      if (p0.size() != spec.dim()) throw ConfigError("--p0 has wrong dimension");
      if (!(T > 0)) throw ConfigError("--T must be positive");
      IntegrateOptions opts;
      opts.rel_tol = tol > 0 ? tol : rel_tol;
      opts.abs_tol = abs_tol;
      opts.n_samples = samples;
      NormalExtremal ext = integrate_extremal(spec, x0, p0, T, opts);
      for (const auto& s : ext.samples)
        out += "{\"t\":" + fmt(s.t) + ",\"x\":" + fmt_vec(s.x) + ",\"p\":" + fmt_vec(s.p) +
               ",\"H\":" + fmt(s.H) + "}\n";
      emit(out, output_path);
      std::fprintf(stderr, "status=%s t_end=%s max_drift=%s\n", status_name(ext.status),
                   fmt(ext.t_end).c_str(), fmt(ext.max_drift).c_str());
      return ext.status == FlowStatus::StepFailure ? 1 : 0;
    }

    if (app.got_subcommand(exp_cmd)) {
      Eigen::VectorXd x0 = parse_point(from_csv);
      check_point(spec, x0, "--from");
      if (opt_p0->count() == 0 && opt_v0->count() == 0)
        throw ConfigError("exp requires --p0 or --v0");
      Eigen::VectorXd point;
      if (opt_p0->count() > 0) {
        Eigen::VectorXd p0 = parse_point(p0_csv);
        if (p0.size() != spec.dim()) throw ConfigError("--p0 has wrong dimension");
        point = exp_star(spec, x0, p0);
      } else {
        Eigen::VectorXd w0 = parse_point(v0_csv);
        if (w0.size() != spec.rank()) throw ConfigError("--v0 must have k components");
        point = exp_map(spec, x0, w0);
      }
      emit(fmt_vec(point) + "\n", output_path);
      return 0;
    }

    if (app.got_subcommand(distance)) {
      Eigen::VectorXd x0 = parse_point(from_csv), y0 = parse_point(to_csv);
      check_point(spec, x0, "--from");
      check_point(spec, y0, "--to");
      if (x0 == y0) throw ConfigError("--from and --to must differ");
      ShootOptions opts;
      if (tol > 0) opts.tol = tol;
      opts.n_starts = starts;
      opts.n_shells = shells;
      opts.max_iters = max_iters;
      opts.max_radius = max_radius;
      opts.seed = seed;
      GeodesicResult r = shoot(spec, x0, y0, opts);
      bool reached = r.status == GeodesicResult::Status::Reached;
      out += "length=" + fmt(r.length) + "\n";
      out += std::string("status=") + (reached ? "Reached" : "Unreached") + "\n";
      out += "residual=" + fmt(r.residual) + "\n";
      out += "p0=" + fmt_vec(r.p0) + "\n";
      out += "starts_used=" + std::to_string(r.starts_used) + "\n";
      emit(out, output_path);
      return (!reached && require_reached) ? 1 : 0;
    }

    if (app.got_subcommand(sphere)) {
      Eigen::VectorXd x0 = parse_point(from_csv);
      check_point(spec, x0, "--at");
      if (!(radius > 0)) throw ConfigError("--r must be positive");
      if (n_points < 1) throw ConfigError("--n must be >= 1");
      auto points = sphere_map(spec, x0, radius, n_points, seed);
      for (const auto& sp : points)
        out += "{\"p0\":" + fmt_vec(sp.p0) + ",\"point\":" + fmt_vec(sp.point) +
               ",\"escaped\":" + (sp.escaped ? "true" : "false") + "}\n";
      emit(out, output_path);
      return 0;
    }

    if (app.got_subcommand(bracket)) {
      Eigen::VectorXd x0 = parse_point(from_csv);
      check_point(spec, x0, "--at");
      BracketReport rep = bracket_generating(spec, x0, depth, tol > 0 ? tol : 1e-9);
      out += std::string("generating=") + (rep.generating ? "true" : "false") +
             " growth=" + fmt_growth(rep.growth) + "\n";
      emit(out, output_path);
      return 0;
    }

    if (app.got_subcommand(complete)) {
      Eigen::VectorXd x0 = parse_point(from_csv);
      check_point(spec, x0, "--at");
      CompletenessReport rep = completeness_probe(spec, x0, dirs, Tmax, seed);
      for (std::size_t i = 0; i < rep.statuses.size(); ++i)
        out += "dir=" + std::to_string(i) + " status=" + status_name(rep.statuses[i]) +
               " t_end=" + fmt(rep.escape_times[i]) + "\n";
      out += "extendable=" + std::to_string(rep.completed) + "/" + std::to_string(dirs) +
             " fraction=" + fmt(rep.fraction) + " max_drift=" + fmt(rep.max_drift) + "\n";
      emit(out, output_path);
      return 0;
    }

    if (app.got_subcommand(hopf)) {
      DomainBox region = parse_region(region_text);
      if (region.min.size() != spec.dim()) throw ConfigError("--region has wrong dimension");
      HopfRinowOptions opts;
      if (tol > 0) opts.shoot.tol = tol;
      opts.shoot.n_starts = starts;
      opts.shoot.seed = seed;
      HopfRinowReport rep = hopf_rinow_probe(spec, region, pairs, seed, opts);
      for (const auto& pair : rep.pairs)
        out += "{\"x\":" + fmt_vec(pair.x) + ",\"y\":" + fmt_vec(pair.y) +
               ",\"forward\":" + geodesic_line(pair.forward) +
               ",\"backward\":" + geodesic_line(pair.backward) + "}\n";
      out += "pairs=" + std::to_string(pairs) + " shoots=" + std::to_string(rep.n_shoots) +
             " reached=" + std::to_string(rep.n_reached) +
             " success_fraction=" + fmt(rep.success_fraction) + "\n";
      out += "max_residual=" + fmt(rep.max_residual) + "\n";
      out += "triangle_violations=" + std::to_string(rep.triangle_violations) + "\n";
      out += "max_asymmetry=" + fmt(rep.max_asymmetry) +
             " mean_asymmetry=" + fmt(rep.mean_asymmetry) + "\n";
      out += "completeness_extendable=" + std::to_string(rep.completeness.completed) + "/" +
             std::to_string(opts.completeness_dirs) +
             " completeness_max_drift=" + fmt(rep.completeness.max_drift) + "\n";
      out += std::string("bracket_generating=") + (rep.bracket.generating ? "true" : "false") +
             " growth=" + fmt_growth(rep.bracket.growth) + "\n";
      emit(out, output_path);
      return 0;
    }

    throw ConfigError("no subcommand selected");
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const SchemaError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const SyntaxError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const UnknownIdentifier& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
}
