#include "afp/serialize.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace afp {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error("config: " + path + ": " + what);
}

const Json& require(const Json& j, const std::string& path, const char* key) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing required field");
  return *it;
}

double as_number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int as_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

std::string as_string(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

bool as_bool(const Json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

template <typename T, typename F>
T get_or(const Json& j, const std::string& path, const char* key, T fallback,
         F convert) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  return convert(*it, path + "." + key);
}

Json real_matrix_to_json(const RealMat& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      double v = m(r, c);
      if (std::isnan(v))
        row.push_back(nullptr);  // NaN marks an undefined entry
      else
        row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

RealMat real_matrix_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) fail(path, "expected nested arrays");
  RealMat m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      fail(path, "ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) {
      const Json& v = j[r][c];
      if (v.is_null())
        m(r, c) = std::numeric_limits<double>::quiet_NaN();
      else
        m(r, c) = as_number(v, path);
    }
  }
  return m;
}

}  // namespace

Json matrix_to_json(const Mat& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      row.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat matrix_from_json(const Json& j) {
  const std::string path = "matrix";
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) fail(path, "expected nested arrays");
  Mat m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      fail(path, "ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) {
      const Json& e = j[r][c];
      if (!e.is_array() || e.size() != 2)
        fail(path, "entries must be [re, im] pairs");
      m(r, c) = Cplx(as_number(e[0], path), as_number(e[1], path));
    }
  }
  return m;
}

Json target_to_json(const TargetTransform& t) {
  Json j;
  j["n_channels"] = t.n_channels;
  j["scenario"] = t.scenario == Scenario::Hop ? "hop" : "broadcast";
  j["matrix"] = matrix_to_json(t.matrix);
  if (t.scenario == Scenario::Hop) j["hop_map"] = t.hop_map;
  return j;
}

TargetTransform target_from_json(const Json& j) {
  const std::string path = "target";
  std::string scenario = as_string(require(j, path, "scenario"), path);
  Mat m = matrix_from_json(require(j, path, "matrix"));
  if (scenario == "broadcast") return TargetTransform::custom_broadcast(std::move(m));
  if (scenario != "hop") fail(path + ".scenario", "expected hop or broadcast");
  const Json& map_j = require(j, path, "hop_map");
  if (!map_j.is_array()) fail(path + ".hop_map", "expected an array");
  std::vector<int> hop_map;
  for (const Json& v : map_j) hop_map.push_back(as_int(v, path + ".hop_map"));
  return TargetTransform::custom_hop(std::move(m), std::move(hop_map));
}

namespace {

Json grid_to_json(const ModeGrid& g) {
  Json j;
  j["m_total"] = g.m_total;
  j["n_channels"] = g.n_channels;
  j["channel_offset"] = g.channel_offset;
  j["shaper_support"] = g.shaper_support;
  return j;
}

ModeGrid grid_from_json(const Json& j, const std::string& path) {
  return ModeGrid(as_int(require(j, path, "m_total"), path + ".m_total"),
                  as_int(require(j, path, "n_channels"), path + ".n_channels"),
                  as_int(require(j, path, "channel_offset"),
                         path + ".channel_offset"),
                  as_int(require(j, path, "shaper_support"),
                         path + ".shaper_support"));
}

}  // namespace

Json design_to_json(const AfpDesign& d) {
  Json j;
  j["grid"] = grid_to_json(d.grid);
  j["allow_even_depth"] = d.allow_even_depth;
  Json elements = Json::array();
  for (const Element& e : d.elements) {
    Json je;
    if (e.kind == Element::Kind::Shaper) {
      je["kind"] = "shaper";
      je["phases"] = e.shaper_phases;
    } else {
      je["kind"] = "modulator";
      Json jm;
      if (e.modulation.kind == Modulation::Kind::Arbitrary) {
        jm["kind"] = "arbitrary";
        jm["phases"] = e.modulation.phases;
      } else {
        jm["kind"] = "tonal";
        Json tones = Json::array();
        for (const Tone& t : e.modulation.tones) {
          Json jt;
          jt["harmonic"] = t.harmonic;
          jt["amplitude"] = t.amplitude;
          jt["phase"] = t.phase;
          tones.push_back(std::move(jt));
        }
        jm["tones"] = std::move(tones);
      }
      je["modulation"] = std::move(jm);
    }
    elements.push_back(std::move(je));
  }
  j["elements"] = std::move(elements);
  return j;
}

AfpDesign design_from_json(const Json& j) {
  const std::string path = "design";
  ModeGrid grid = grid_from_json(require(j, path, "grid"), path + ".grid");
  bool allow_even = get_or(j, path, "allow_even_depth", false, as_bool);
  const Json& elements_j = require(j, path, "elements");
  if (!elements_j.is_array()) fail(path + ".elements", "expected an array");
  std::vector<Element> elements;
  for (std::size_t i = 0; i < elements_j.size(); ++i) {
    const std::string epath = path + ".elements[" + std::to_string(i) + "]";
    const Json& je = elements_j[i];
    std::string kind = as_string(require(je, epath, "kind"), epath + ".kind");
    if (kind == "shaper") {
      const Json& phases_j = require(je, epath, "phases");
      if (!phases_j.is_array()) fail(epath + ".phases", "expected an array");
      std::vector<double> phases;
      for (const Json& v : phases_j)
        phases.push_back(as_number(v, epath + ".phases"));
      elements.push_back(Element::shaper(std::move(phases)));
    } else if (kind == "modulator") {
      const Json& jm = require(je, epath, "modulation");
      std::string mkind =
          as_string(require(jm, epath, "kind"), epath + ".modulation.kind");
      if (mkind == "arbitrary") {
        const Json& phases_j = require(jm, epath + ".modulation", "phases");
        if (!phases_j.is_array())
          fail(epath + ".modulation.phases", "expected an array");
        std::vector<double> phases;
        for (const Json& v : phases_j)
          phases.push_back(as_number(v, epath + ".modulation.phases"));
        elements.push_back(
            Element::modulator(Modulation::arbitrary(std::move(phases))));
      } else if (mkind == "tonal") {
        const Json& tones_j = require(jm, epath + ".modulation", "tones");
        if (!tones_j.is_array())
          fail(epath + ".modulation.tones", "expected an array");
        std::vector<Tone> tones;
        for (const Json& jt : tones_j) {
          const std::string tpath = epath + ".modulation.tones";
          Tone t;
          t.harmonic = as_int(require(jt, tpath, "harmonic"), tpath);
          t.amplitude = as_number(require(jt, tpath, "amplitude"), tpath);
          t.phase = as_number(require(jt, tpath, "phase"), tpath);
          tones.push_back(t);
        }
        elements.push_back(
            Element::modulator(Modulation::tonal(std::move(tones))));
      } else {
        fail(epath + ".modulation.kind", "expected arbitrary or tonal");
      }
    } else {
      fail(epath + ".kind", "expected modulator or shaper");
    }
  }
  return AfpDesign(std::move(elements), grid, allow_even);
}

namespace {

Json structure_to_json(const CascadeStructure& s) {
  Json j;
  j["depth"] = s.depth;
  j["regime"] = s.regime == DriveRegime::Arbitrary ? "arbitrary" : "tonal";
  j["tones"] = s.tones;
  j["allow_even_depth"] = s.allow_even_depth;
  return j;
}

CascadeStructure structure_from_json(const Json& j, const std::string& path) {
  CascadeStructure s;
  s.depth = get_or(j, path, "depth", s.depth, as_int);
  std::string regime = get_or(j, path, "regime", std::string("arbitrary"),
                              as_string);
  if (regime == "arbitrary")
    s.regime = DriveRegime::Arbitrary;
  else if (regime == "tonal")
    s.regime = DriveRegime::Tonal;
  else
    fail(path + ".regime", "expected arbitrary or tonal");
  s.tones = get_or(j, path, "tones", s.tones, as_int);
  s.allow_even_depth =
      get_or(j, path, "allow_even_depth", s.allow_even_depth, as_bool);
  return s;
}

Json noise_to_json(const NoiseModel& n) {
  Json j;
  j["mu"] = n.mu;
  j["eta"] = n.eta;
  j["d_elec"] = n.d_elec;
  return j;
}

NoiseModel noise_from_json(const Json& j, const std::string& path) {
  if (j.is_object() && j.contains("mu_eff") && !j.contains("mu"))
    return NoiseModel::from_mu_eff(
        as_number(j.at("mu_eff"), path + ".mu_eff"));
  double mu = as_number(require(j, path, "mu"), path + ".mu");
  double eta = get_or(j, path, "eta", 1.0, as_number);
  double d_elec = get_or(j, path, "d_elec", 0.0, as_number);
  return NoiseModel(mu, eta, d_elec);
}

Json objective_to_json(const Objective& o) {
  Json j;
  if (o.kind == Objective::Kind::MaxSuccess) {
    j["kind"] = "max_success";
    j["f_min"] = o.f_min;
  } else {
    j["kind"] = "max_min_mi";
    j["noise"] = noise_to_json(*o.noise);
  }
  return j;
}

Objective objective_from_json(const Json& j, const std::string& path) {
  std::string kind = get_or(j, path, "kind", std::string("max_success"),
                            as_string);
  if (kind == "max_success") {
    return Objective::max_success(get_or(j, path, "f_min", 0.99, as_number));
  }
  if (kind != "max_min_mi") fail(path + ".kind", "expected max_success or max_min_mi");
  if (j.contains("noise"))
    return Objective::max_min_mi(noise_from_json(j.at("noise"), path + ".noise"));
  // Allow the shorthand of noise fields directly on the objective.
  return Objective::max_min_mi(noise_from_json(j, path));
}

Json budget_to_json(const SearchBudget& b) {
  Json j;
  j["restarts"] = b.restarts;
  j["max_iterations"] = b.max_iterations;
  j["seed"] = b.seed;
  j["workers"] = b.workers;
  return j;
}

SearchBudget budget_from_json(const Json& j, const std::string& path) {
  SearchBudget b;
  b.restarts = get_or(j, path, "restarts", b.restarts, as_int);
  b.max_iterations = get_or(j, path, "max_iterations", b.max_iterations, as_int);
  b.seed = get_or(j, path, "seed", b.seed,
                  [](const Json& v, const std::string& p) {
                    if (!v.is_number_integer()) fail(p, "expected an integer");
                    return v.get<std::uint64_t>();
                  });
  b.workers = get_or(j, path, "workers", b.workers, as_int);
  return b;
}

}  // namespace

Json problem_to_json(const DesignProblem& p) {
  Json j;
  j["target"] = target_to_json(p.target);
  j["grid"] = grid_to_json(p.grid);
  j["structure"] = structure_to_json(p.structure);
  j["objective"] = objective_to_json(p.objective);
  j["budget"] = budget_to_json(p.budget);
  return j;
}

DesignProblem problem_from_json(const Json& j) {
  const std::string path = "problem";
  DesignProblem p;
  p.target = target_from_json(require(j, path, "target"));
  p.grid = grid_from_json(require(j, path, "grid"), path + ".grid");
  p.structure =
      structure_from_json(require(j, path, "structure"), path + ".structure");
  p.objective =
      objective_from_json(require(j, path, "objective"), path + ".objective");
  p.budget = budget_from_json(require(j, path, "budget"), path + ".budget");
  validate_problem(p);
  return p;
}

Json report_to_json(const MetricReport& r) {
  Json j;
  j["fidelity"] = r.fidelity;
  j["success"] = r.success;
  j["channel_probs"] = r.channel_probs;
  j["selectivities"] = real_matrix_to_json(r.selectivities);
  if (r.mu_eff) j["mu_eff"] = *r.mu_eff;
  if (r.mi) {
    Json jm;
    Json entries = Json::array();
    for (const MiEntry& e : r.mi->entries) {
      Json je;
      je["out"] = e.out_channel;
      je["in"] = e.in_channel;
      je["bits"] = e.bits;
      entries.push_back(std::move(je));
    }
    jm["entries"] = std::move(entries);
    jm["min"] = r.mi->mi_min;
    jm["mean"] = r.mi->mi_mean;
    j["mi"] = std::move(jm);
  }
  return j;
}

MetricReport report_from_json(const Json& j) {
  const std::string path = "report";
  MetricReport r;
  r.fidelity = as_number(require(j, path, "fidelity"), path + ".fidelity");
  r.success = as_number(require(j, path, "success"), path + ".success");
  const Json& probs = require(j, path, "channel_probs");
  if (!probs.is_array()) fail(path + ".channel_probs", "expected an array");
  for (const Json& v : probs)
    r.channel_probs.push_back(as_number(v, path + ".channel_probs"));
  r.selectivities = real_matrix_from_json(require(j, path, "selectivities"),
                                          path + ".selectivities");
  if (j.contains("mu_eff"))
    r.mu_eff = as_number(j.at("mu_eff"), path + ".mu_eff");
  if (j.contains("mi")) {
    const Json& jm = j.at("mi");
    MiAggregate agg;
    const Json& entries = require(jm, path + ".mi", "entries");
    for (const Json& je : entries) {
      MiEntry e;
      e.out_channel = as_int(require(je, path + ".mi.entries", "out"),
                             path + ".mi.entries.out");
      e.in_channel = as_int(require(je, path + ".mi.entries", "in"),
                            path + ".mi.entries.in");
      e.bits = as_number(require(je, path + ".mi.entries", "bits"),
                         path + ".mi.entries.bits");
      agg.entries.push_back(e);
    }
    agg.mi_min = as_number(require(jm, path + ".mi", "min"), path + ".mi.min");
    agg.mi_mean =
        as_number(require(jm, path + ".mi", "mean"), path + ".mi.mean");
    r.mi = std::move(agg);
  }
  return r;
}

Json solution_to_json(const Solution& s) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["problem"] = problem_to_json(s.problem);
  j["design"] = design_to_json(s.design);
  j["feasible"] = s.feasible;
  j["report"] = report_to_json(s.report);
  Json jt;
  jt["seed"] = s.trace.seed;
  jt["winner_restart"] = s.trace.winner_restart;
  jt["restart_scores"] = s.trace.restart_scores;
  Json feas = Json::array();
  for (bool b : s.trace.restart_feasible) feas.push_back(b);
  jt["restart_feasible"] = std::move(feas);
  jt["iterations"] = s.trace.iterations;
  jt["evaluations"] = s.trace.evaluations;
  j["trace"] = std::move(jt);
  return j;
}

Solution solution_from_json(const Json& j) {
  const std::string path = "solution";
  int version = as_int(require(j, path, "schema_version"),
                       path + ".schema_version");
  if (version != kSchemaVersion)
    fail(path + ".schema_version",
         "unsupported version " + std::to_string(version));
  Solution s;
  s.problem = problem_from_json(require(j, path, "problem"));
  s.design = design_from_json(require(j, path, "design"));
  s.feasible = as_bool(require(j, path, "feasible"), path + ".feasible");
  s.report = report_from_json(require(j, path, "report"));
  const Json& jt = require(j, path, "trace");
  s.trace.seed = jt.value("seed", std::uint64_t{0});
  s.trace.winner_restart = jt.value("winner_restart", -1);
  if (jt.contains("restart_scores"))
    s.trace.restart_scores = jt.at("restart_scores").get<std::vector<double>>();
  if (jt.contains("restart_feasible"))
    for (const Json& v : jt.at("restart_feasible"))
      s.trace.restart_feasible.push_back(v.get<bool>());
  s.trace.iterations = jt.value("iterations", 0LL);
  s.trace.evaluations = jt.value("evaluations", 0LL);
  return s;
}

void save_solution(const std::string& path, const Solution& s) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_solution: cannot write " + path);
  out << solution_to_json(s).dump(2) << "\n";
}

Solution load_solution(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_solution: cannot read " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("load_solution: " + path + ": " + e.what());
  }
  return solution_from_json(j);
}

DesignProblem problem_from_config(const Json& config) {
  if (!config.is_object()) fail("<root>", "expected a JSON object");
  DesignProblem p;

  const Json& jt = require(config, "<root>", "target");
  std::string kind = as_string(require(jt, "target", "kind"), "target.kind");
  int n_channels = 0;
  if (kind == "hop") {
    n_channels = as_int(require(jt, "target", "n_channels"),
                        "target.n_channels");
    int power = get_or(jt, "target", "power", 1, as_int);
    p.target = permutation_power(n_channels, power);
  } else if (kind == "dft") {
    n_channels = as_int(require(jt, "target", "n_channels"),
                        "target.n_channels");
    p.target = dft_target(n_channels);
  } else if (kind == "custom") {
    p.target = target_from_json(jt);
    n_channels = p.target.n_channels;
  } else {
    fail("target.kind", "expected hop, dft, or custom");
  }

  int m_total = 128, support = 32;
  int channel_offset = -1;
  if (config.contains("grid")) {
    const Json& jg = config.at("grid");
    m_total = get_or(jg, "grid", "m_total", m_total, as_int);
    support = get_or(jg, "grid", "shaper_support", support, as_int);
    channel_offset = get_or(jg, "grid", "channel_offset", -1, as_int);
    if (jg.contains("n_channels") &&
        as_int(jg.at("n_channels"), "grid.n_channels") != n_channels)
      fail("grid.n_channels", "disagrees with the target's channel count");
  }
  try {
    p.grid = (channel_offset < 0)
                 ? ModeGrid::centered(m_total, n_channels, support)
                 : ModeGrid(m_total, n_channels, channel_offset, support);
  } catch (const std::invalid_argument& e) {
    fail("grid", e.what());
  }

  if (config.contains("structure"))
    p.structure = structure_from_json(config.at("structure"), "structure");
  if (config.contains("objective"))
    p.objective = objective_from_json(config.at("objective"), "objective");
  if (config.contains("budget"))
    p.budget = budget_from_json(config.at("budget"), "budget");

  try {
    validate_problem(p);
  } catch (const std::invalid_argument& e) {
    fail("<root>", e.what());
  }
  return p;
}

DesignProblem load_problem_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot read " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("config: " + path + ": " + e.what());
  }
  return problem_from_config(j);
}

Json validation_to_json(const ValidationTable& t) {
  Json rows = Json::array();
  for (const ValidationRow& r : t.rows) {
    Json jr;
    jr["out"] = r.out_channel;
    jr["in"] = r.in_channel;
    jr["analytic"] = r.analytic;
    jr["empirical"] = r.empirical;
    jr["rel_dev"] = r.rel_dev;
    rows.push_back(std::move(jr));
  }
  Json j;
  j["rows"] = std::move(rows);
  j["max_rel_dev"] = t.max_rel_dev;
  return j;
}

}  // namespace afp
