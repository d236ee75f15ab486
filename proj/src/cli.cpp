#include "bcrsp/cli.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "bcrsp/checks.hpp"
#include "bcrsp/optics.hpp"
#include "bcrsp/session.hpp"

namespace bcrsp::cli {

namespace {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

double phase_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_phase(j.get<std::string>());
  throw ConfigError("phase must be a number or a string such as \"2pi/3\"");
}

std::vector<double> phase_list(const json& doc, const char* key, std::size_t dim) {
  if (!doc.contains(key)) return std::vector<double>(dim - 1, 0.0);
  const json& arr = doc.at(key);
  if (!arr.is_array()) throw ConfigError(std::string(key) + " must be a list");
  if (arr.size() != dim - 1) {
    throw ConfigError(std::string(key) + " must hold dimension - 1 = " + std::to_string(dim - 1) + " phases");
  }
  std::vector<double> out;
  for (const auto& e : arr) out.push_back(phase_from_json(e));
  return out;
}

std::string correction_label(std::size_t k) { return "U" + std::to_string(k); }

std::vector<double> default_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 10; ++i) g.push_back(i / 10.0);
  return g;
}

double overlap(const StateVector& a, const StateVector& b) { return std::abs(inner(a, b)); }

}  // namespace

Format parse_format(std::string_view s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw ConfigError("unknown format '" + std::string(s) + "' (expected csv or json)");
}

std::string format_real(double v) {
  if (std::abs(v) < 5e-13) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12f", v);
  return buf;
}

double parse_phase(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  }
  const auto fail = [&]() -> ConfigError { return ConfigError("cannot parse phase '" + std::string(text) + "'"); };
  if (s.empty()) throw fail();

  std::string_view rest = s;
  double sign = 1.0;
  if (rest.front() == '-' || rest.front() == '+') {
    sign = rest.front() == '-' ? -1.0 : 1.0;
    rest.remove_prefix(1);
  }
  double denom = 1.0;
  if (const auto slash = rest.find('/'); slash != std::string_view::npos) {
    const auto d = parse_number(rest.substr(slash + 1));
    if (!d || *d == 0.0) throw fail();
    denom = *d;
    rest = rest.substr(0, slash);
  }
  double factor = 1.0;
  if (const auto pi = rest.find("pi"); pi != std::string_view::npos) {
    if (pi + 2 != rest.size()) throw fail();
    factor = std::numbers::pi;
    rest = rest.substr(0, pi);
    if (!rest.empty() && rest.back() == '*') rest.remove_suffix(1);
    if (rest.empty()) return sign * factor / denom;
  }
  const auto coeff = parse_number(rest);
  if (!coeff) throw fail();
  return sign * *coeff * factor / denom;
}

RunConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  try {
    RunConfig c;
    if (!doc.contains("dimension")) throw ConfigError("config needs a dimension");
    const auto dim = doc.at("dimension").get<long long>();
    if (dim < 2 || dim > 16) throw ConfigError("dimension must be between 2 and 16");
    c.dimension = static_cast<std::size_t>(dim);
    c.alice_phases = phase_list(doc, "alice_phases", c.dimension);
    c.bob_phases = phase_list(doc, "bob_phases", c.dimension);

    if (doc.contains("noise") && !doc.at("noise").is_null()) {
      const json& n = doc.at("noise");
      NoiseConfig nc;
      try {
        nc.kind = noise::parse_noise_kind(n.at("kind").get<std::string>());
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      if (n.contains("gamma")) {
        const double g = n.at("gamma").get<double>();
        if (!(g >= 0.0 && g <= 1.0)) throw ConfigError("noise gamma must lie in [0, 1]");
        nc.gamma = g;
      }
      c.noise = nc;
    }
    if (doc.contains("outcome_policy")) {
      const auto p = doc.at("outcome_policy").get<std::string>();
      if (p == "averaged") {
        c.policy = noise::OutcomePolicy::Averaged;
      } else if (p == "conditioned") {
        c.policy = noise::OutcomePolicy::Conditioned;
      } else {
        throw ConfigError("outcome_policy must be \"averaged\" or \"conditioned\"");
      }
    }
    if (doc.contains("forced_outcome") && !doc.at("forced_outcome").is_null()) {
      const auto v = doc.at("forced_outcome").get<std::vector<long long>>();
      if (v.size() != 4) throw ConfigError("forced_outcome must be [l, n, m, k]");
      for (auto x : v) {
        if (x < 0 || x >= dim) throw ConfigError("forced_outcome entries must lie in 0..dimension-1");
      }
      c.forced_outcome = OutcomeTuple{static_cast<std::size_t>(v[0]), static_cast<std::size_t>(v[1]),
                                      static_cast<std::size_t>(v[2]), static_cast<std::size_t>(v[3])};
    }
    if (doc.contains("seed")) c.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("trials")) {
      const auto t = doc.at("trials").get<long long>();
      if (t < 1) throw ConfigError("trials must be at least 1");
      c.trials = static_cast<std::size_t>(t);
    }
    if (doc.contains("gammas")) {
      c.gammas = doc.at("gammas").get<std::vector<double>>();
      for (double g : c.gammas) {
        if (!(g >= 0.0 && g <= 1.0)) throw ConfigError("gammas must lie in [0, 1]");
      }
    } else {
      c.gammas = default_grid();
    }
    if (doc.contains("charlie_consents")) c.charlie_consents = doc.at("charlie_consents").get<bool>();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

int cmd_run(const RunConfig& config, Format format, std::ostream& out, std::ostream& err) {
  if (config.noise) {
    err << "error: run executes the noiseless protocol; use sweep for noisy configs\n";
    return 2;
  }
  const PhaseVector alice = config.alice();
  const PhaseVector bob = config.bob();
  const StateVector alice_target = equatorial_state(alice);
  const StateVector bob_target = equatorial_state(bob);

  bool all_ok = true;
  ojson trials = ojson::array();
  if (format == Format::Csv) out << "trial,status,l,n,m,k,A1_correction,B2_correction,fidelity_A1,fidelity_B2\n";
  for (std::size_t t = 0; t < config.trials; ++t) {
    auto s = session::Session::create(alice, bob, config.dimension, config.charlie_consents,
                                      mix_seed(config.seed, t), config.forced_outcome);
    s.run();
    const bool completed = s.status() == session::SessionStatus::Completed;
    ojson row;
    row["trial"] = t;
    row["status"] = completed ? "completed" : "aborted";
    if (!completed) {
      if (format == Format::Csv) out << t << ",aborted,,,,,,,,\n";
      trials.push_back(std::move(row));
      continue;
    }
    const ProtocolResult& r = *s.result();
    const double fa = overlap(r.alice_final, bob_target);
    const double fb = overlap(r.bob_final, alice_target);
    all_ok = all_ok && r.alice_recovered && r.bob_recovered;
    if (format == Format::Csv) {
      out << t << ",completed," << r.outcome.l << ',' << r.outcome.n << ',' << r.outcome.m << ','
          << r.outcome.k << ',' << correction_label(r.corrections.a1_index) << ','
          << correction_label(r.corrections.b2_index) << ',' << format_real(fa) << ',' << format_real(fb) << '\n';
    } else {
      row["outcome"] = {{"l", r.outcome.l}, {"n", r.outcome.n}, {"m", r.outcome.m}, {"k", r.outcome.k}};
      row["corrections"] = {{"A1", correction_label(r.corrections.a1_index)},
                            {"B2", correction_label(r.corrections.b2_index)}};
      row["fidelity_A1"] = fa;
      row["fidelity_B2"] = fb;
      trials.push_back(std::move(row));
    }
  }
  if (format == Format::Json) {
    ojson doc;
    doc["dimension"] = config.dimension;
    doc["seed"] = config.seed;
    doc["trials"] = std::move(trials);
    doc["all_recovered"] = all_ok;
    out << doc.dump(2) << '\n';
  }
  if (!all_ok) err << "error: at least one trial failed to recover its target\n";
  return all_ok ? 0 : 1;
}

int cmd_sweep(const RunConfig& config, Format format, std::ostream& out, std::ostream& err) {
  if (!config.noise) {
    err << "error: sweep needs a noise kind\n";
    return 2;
  }
  const PhaseVector alice = config.alice();
  const PhaseVector bob = config.bob();
  noise::RunOptions options;
  options.policy = config.policy;
  if (config.forced_outcome) options.conditioned_on = *config.forced_outcome;

  ojson rows = ojson::array();
  if (format == Format::Csv) out << "gamma,exact_fidelity_A1,exact_fidelity_B2,paper_fidelity,deviation\n";
  for (double g : config.gammas) {
    const noise::NoiseFactor gamma(g);
    const noise::RunResult r = noise::noisy_protocol_run(alice, bob, config.noise->kind, gamma, options);
    const std::optional<double> paper = noise::paper_fidelity(config.noise->kind, bob, gamma);
    if (format == Format::Csv) {
      out << format_real(g) << ',' << format_real(r.fidelity_a1) << ',' << format_real(r.fidelity_b2) << ','
          << (paper ? format_real(*paper) : "") << ',' << (paper ? format_real(r.fidelity_a1 - *paper) : "")
          << '\n';
    } else {
      ojson row;
      row["gamma"] = g;
      row["exact_fidelity_A1"] = r.fidelity_a1;
      row["exact_fidelity_B2"] = r.fidelity_b2;
      row["paper_fidelity"] = paper ? ojson(*paper) : ojson(nullptr);
      row["deviation"] = paper ? ojson(r.fidelity_a1 - *paper) : ojson(nullptr);
      rows.push_back(std::move(row));
    }
  }
  if (format == Format::Json) {
    ojson doc;
    doc["noise"] = std::string(noise::to_string(config.noise->kind));
    doc["policy"] = config.policy == noise::OutcomePolicy::Averaged ? "averaged" : "conditioned";
    doc["rows"] = std::move(rows);
    out << doc.dump(2) << '\n';
  }
  return 0;
}

int cmd_table(std::size_t dim, Format format, std::ostream& out, std::ostream& err) {
  if (dim < 2 || dim > 6) {
    err << "error: table dimension must be between 2 and 6\n";
    return 2;
  }
  const std::string rule = "A1 is corrected by U_{(m+n) mod N}, B2 by U_{(k+l) mod N}";
  const std::string swap_note =
      "the published qutrit table prints these two columns swapped: its U_A1 column holds U_{(k+l) mod 3} "
      "and its U_B2 column holds U_{(m+n) mod 3}; this table follows the protocol derivation and its worked example";
  const auto rows = build_correction_table(dim);
  if (format == Format::Csv) {
    out << "# correction table, N=" << dim << ": " << rule << '\n';
    if (dim == 3) out << "# note: " << swap_note << '\n';
    out << "l,n,m,k,U_A1,U_B2\n";
    for (const auto& r : rows) {
      out << r.outcome.l << ',' << r.outcome.n << ',' << r.outcome.m << ',' << r.outcome.k << ','
          << correction_label(r.rule.a1_index) << ',' << correction_label(r.rule.b2_index) << '\n';
    }
    return 0;
  }
  ojson doc;
  doc["dimension"] = dim;
  doc["rule"] = rule;
  if (dim == 3) doc["note"] = swap_note;
  doc["rows"] = ojson::array();
  for (const auto& r : rows) {
    doc["rows"].push_back({{"l", r.outcome.l},
                           {"n", r.outcome.n},
                           {"m", r.outcome.m},
                           {"k", r.outcome.k},
                           {"U_A1", correction_label(r.rule.a1_index)},
                           {"U_B2", correction_label(r.rule.b2_index)}});
  }
  out << doc.dump(2) << '\n';
  return 0;
}

namespace {

std::optional<std::size_t> builtin_size(std::string_view source, std::string_view prefix) {
  if (source.substr(0, prefix.size()) != prefix) return std::nullopt;
  const auto v = parse_number(source.substr(prefix.size()));
  if (!v || *v < 1 || *v > static_cast<double>(optics::kMaxReckDim) || *v != std::floor(*v)) return std::nullopt;
  return static_cast<std::size_t>(*v);
}

Eigen::MatrixXcd load_matrix(std::string_view source) {
  if (source == "charlie4") return optics::fourier_matrix(4);
  if (auto n = builtin_size(source, "identity")) {
    return Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(*n), static_cast<Eigen::Index>(*n));
  }
  if (auto n = builtin_size(source, "fourier")) {
    if (*n < 2) throw ConfigError("fourier matrix needs dimension at least 2");
    return optics::fourier_matrix(*n);
  }
  std::ifstream in{std::string(source)};
  if (!in) throw ConfigError("cannot open matrix file '" + std::string(source) + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("matrix file is not valid JSON: ") + e.what());
  }
  if (!doc.is_array() || doc.empty()) throw ConfigError("matrix must be a non-empty list of rows");
  const auto n = static_cast<Eigen::Index>(doc.size());
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const json& row = doc[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) throw ConfigError("matrix must be square");
    for (Eigen::Index j = 0; j < n; ++j) {
      const json& e = row[static_cast<std::size_t>(j)];
      if (e.is_number()) {
        m(i, j) = e.get<double>();
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(i, j) = Complex(e[0].get<double>(), e[1].get<double>());
      } else {
        throw ConfigError("matrix entries must be numbers or [re, im] pairs");
      }
    }
  }
  return m;
}

}  // namespace

int cmd_decompose(std::string_view source, std::ostream& out, std::ostream& err) {
  Eigen::MatrixXcd u;
  try {
    u = load_matrix(source);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  optics::InterferometerNetwork net;
  try {
    net = optics::reck_decompose(u);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  const double error = optics::max_deviation(optics::compose(net), u);
  ojson doc;
  doc["dimension"] = net.dim;
  doc["source"] = std::string(source);
  doc["beam_splitters"] = net.beam_splitter_count();
  doc["phase_shifters"] = net.phase_shifter_count();
  doc["reconstruction_error"] = error;
  doc["elements"] = ojson::parse(optics::network_to_json(net));
  out << doc.dump(2) << '\n';
  if (error > kStructuralTol) {
    err << "error: reconstruction error " << error << " exceeds tolerance\n";
    return 1;
  }
  return 0;
}

int cmd_verify(std::uint64_t seed, Format format, std::ostream& out, std::ostream& err) {
  checks::SuiteOptions options;
  options.seed = seed;
  const auto results = checks::run_invariant_suite(options);
  bool ok = true;
  ojson arr = ojson::array();
  if (format == Format::Csv) out << "check,status,detail\n";
  for (const auto& r : results) {
    ok = ok && r.pass;
    if (format == Format::Csv) {
      out << r.name << ',' << (r.pass ? "pass" : "fail") << ",\"" << r.detail << "\"\n";
    } else {
      arr.push_back({{"check", r.name}, {"status", r.pass ? "pass" : "fail"}, {"detail", r.detail}});
    }
  }
  if (format == Format::Json) out << arr.dump(2) << '\n';
  if (!ok) err << "error: invariant suite reported failures\n";
  return ok ? 0 : 1;
}

}  // namespace bcrsp::cli
