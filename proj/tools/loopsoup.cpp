#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "loopsoup/clusters.hpp"
#include "loopsoup/harness.hpp"
#include "loopsoup/lerw.hpp"
#include "loopsoup/measure.hpp"
#include "loopsoup/reconstruct.hpp"
#include "loopsoup/soup.hpp"

using namespace loopsoup;

namespace {

struct Global {
  std::string config;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out;
};

Json matrix_json(const MatrixXd& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Json vector_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// Inline JSON when the text starts with '{', otherwise a file path.
Json read_config(const std::string& source) {
  const auto first = source.find_first_not_of(" \t\r\n");
  if (first == std::string::npos || source[first] != '{') return read_json_file(source);
  try {
    return Json::parse(source);
  } catch (const Json::parse_error& e) {
    throw Error(Errc::ParseError, std::string("<inline>: ") + e.what());
  }
}

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw Error(Errc::ConfigError, what + ": not a number: " + text);
  return v;
}

CircleParams parse_circle(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t comma; (comma = text.find(',', start)) != std::string::npos; start = comma + 1)
    parts.push_back(text.substr(start, comma - start));
  parts.push_back(text.substr(start));
  if (parts.size() != 3) throw Error(Errc::ConfigError, "--circle: expected n,p,c");
  const double n = parse_number(parts[0], "--circle n");
  if (n != std::floor(n)) throw Error(Errc::ConfigError, "--circle: n must be an integer");
  return {int(n), parse_number(parts[1], "--circle p"), parse_number(parts[2], "--circle c")};
}

// A config file holds either a generator or an experiment config with a "generator" entry.
Generator generator_of(const Global& g) {
  if (g.config.empty()) return three_state_chain();
  const Json j = read_config(g.config);
  if (j.contains("L")) return generator_from_json(j, g.config);
  if (j.contains("generator")) {
    const Json& inner = j.at("generator");
    return inner.is_string() ? load_generator(inner.get<std::string>()) : generator_from_json(inner, g.config);
  }
  throw Error(Errc::ConfigError, g.config + ": no generator found");
}

void emit(const Global& g, const std::string& text) {
  if (g.out.empty())
    std::cout << text;
  else
    write_text_file(g.out, text);
}

StateSet parse_states(const Generator& g, const std::vector<std::string>& labels) {
  StateSet out;
  for (const auto& l : labels) out.push_back(g.index_of(l));
  return out;
}

VectorXd parse_chi(const Generator& g, const std::vector<double>& values) {
  if (values.empty()) return VectorXd::Ones(g.size());
  if (Index(values.size()) != g.size()) throw Error(Errc::InvalidArgument, "--chi needs one value per state");
  return Eigen::Map<const VectorXd>(values.data(), Index(values.size()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Loop measures and loop soups of finite Markov chains"};
  app.require_subcommand(1);
  app.fallthrough();
  Global global;
  app.add_option("--config", global.config, "JSON generator or experiment config");
  app.add_option("--seed", global.seed, "root seed");
  app.add_option("--threads", global.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", global.out, "output file (stdout when omitted)");

  auto* chain = app.add_subcommand("chain", "validate a generator and print Q, killing, V");
  double t = -1.0;
  std::vector<std::string> hit_set;
  chain->add_option("--time", t, "also print P_t");
  chain->add_option("--hit", hit_set, "state labels of a hitting set");

  auto* measure = app.add_subcommand("measure", "loop-measure quantities");
  std::vector<double> chi_values;
  double z = -1.0;
  std::vector<std::string> visit_set, tuple;
  measure->add_option("--chi", chi_values, "chi, one value per state");
  measure->add_option("--z", z, "Laplace argument (real)");
  measure->add_option("--visit", visit_set, "labels of a set F for mu(loops visiting F)");
  measure->add_option("--tuple", tuple, "labels for mu(prod l^x)");

  auto* soup = app.add_subcommand("soup", "sample soups and write occupation fields as CSV");
  double alpha = 1.0;
  std::size_t samples = 1000;
  std::string trivial = "gamma";
  soup->add_option("--alpha", alpha)->check(CLI::PositiveNumber);
  soup->add_option("--samples", samples)->check(CLI::PositiveNumber);
  soup->add_option("--trivial", trivial, "gamma, or explicit[:cutoff] for explicit trivial loops above the cutoff");

  auto* clusters_cmd = app.add_subcommand("clusters", "cluster partitions of sampled soups");
  double cl_alpha = 1.0;
  std::size_t cl_samples = 1000;
  clusters_cmd->add_option("--alpha", cl_alpha)->check(CLI::PositiveNumber);
  clusters_cmd->add_option("--samples", cl_samples)->check(CLI::PositiveNumber);
  std::string circle;
  clusters_cmd->add_option("--circle", circle, "n,p,c: discrete circle instead of --config");

  auto* wilson_cmd = app.add_subcommand("wilson", "Wilson spanning trees");
  std::size_t w_samples = 1000;
  std::string order_mode = "lex", emit_mode = "trees";
  std::vector<std::string> given;
  wilson_cmd->add_option("--samples", w_samples)->check(CLI::PositiveNumber);
  wilson_cmd->add_option("--order", order_mode)->check(CLI::IsMember({"lex", "given"}));
  wilson_cmd->add_option("--given-order", given, "state labels, used with --order given");
  wilson_cmd->add_option("--emit", emit_mode)->check(CLI::IsMember({"trees", "trees+loops"}));

  auto* lerw_cmd = app.add_subcommand("lerw", "loop-erased walk prefix probability");
  std::vector<std::string> prefix;
  lerw_cmd->add_option("--prefix", prefix, "labels; D ends the path at the cemetery")->required();

  auto* verify = app.add_subcommand("verify", "run a verification suite");
  std::string suite;
  std::size_t v_samples = 0;
  std::vector<double> alphas;
  std::string csv;
  verify->add_option("--suite", suite, "suite name");
  verify->add_option("--samples", v_samples);
  verify->add_option("--alphas", alphas);
  verify->add_option("--csv", csv, "also write the check table as CSV");
  bool list = false;
  verify->add_flag("--list", list, "print suite names");

  CLI11_PARSE(app, argc, argv);

  try {
    if (chain->parsed()) {
      const Generator g = generator_of(global);
      Json j = generator_to_json(g);
      j["Q"] = matrix_json(g.Q());
      j["killing"] = vector_json(g.killing());
      j["transient"] = g.transient();
      j["jump_spectral_radius"] = g.jump_radius();
      if (g.transient()) j["V"] = matrix_json(potential(g).V);
      if (t >= 0.0) j["P_t"] = matrix_json(semigroup(g, t));
      if (!hit_set.empty()) {
        const HittingData hd = hitting_return(g, parse_states(g, hit_set));
        j["H"] = matrix_json(hd.H);
        j["R"] = matrix_json(hd.R);
      }
      emit(global, j.dump(2) + "\n");
      return 0;
    }
    if (measure->parsed()) {
      const Generator g = generator_of(global);
      const VectorXd chi = parse_chi(g, chi_values);
      const auto r = loop_laplace(g, chi, z);
      Json j{{"laplace", {{"re", r.value.real()}, {"im", r.value.imag()}, {"formula", r.formula}}},
             {"nontrivial_mass", visit_mass(g, full_set(g.size()))}};
      if (!visit_set.empty()) j["visit_mass"] = visit_mass(g, parse_states(g, visit_set));
      if (!tuple.empty()) j["moment"] = occupation_product_moment(g, parse_states(g, tuple));
      emit(global, j.dump(2) + "\n");
      return 0;
    }
    if (soup->parsed()) {
      const Generator g = generator_of(global);
      SamplerOptions opts;
      if (trivial.rfind("explicit", 0) == 0) {
        opts.trivial = TrivialPolicy::Explicit;
        if (trivial.size() > 8) {
          if (trivial[8] != ':') throw Error(Errc::ConfigError, "--trivial: expected gamma or explicit[:cutoff]");
          opts.trivial_cutoff = parse_number(trivial.substr(9), "--trivial cutoff");
        }
      } else if (trivial != "gamma") {
        throw Error(Errc::ConfigError, "--trivial: expected gamma or explicit[:cutoff]");
      }
      const LoopSampler sampler(g, opts);
      std::vector<VectorXd> fields(samples);
      std::vector<std::size_t> counts(samples);
      parallel_for(samples, global.threads, [&](std::size_t r) {
        const LoopSoup s = sample_soup(sampler, alpha, global.seed, r);
        fields[r] = occupation_field(s).raw;
        counts[r] = s.loops.size();
      });
      std::vector<std::string> header{"replica", "loops"};
      for (const auto& l : g.labels()) header.push_back("L_" + l);
      std::string out = csv_line(header);
      for (std::size_t r = 0; r < samples; ++r) {
        std::vector<std::string> row{std::to_string(r), std::to_string(counts[r])};
        for (Index x = 0; x < g.size(); ++x) row.push_back(format_double(fields[r](x)));
        out += csv_line(row);
      }
      emit(global, out);
      return 0;
    }
    if (clusters_cmd->parsed()) {
      const Generator g = circle.empty() ? generator_of(global) : circle_chain(parse_circle(circle));
      const LoopSampler sampler(g);
      // bitmap over the edges with a positive rate in either direction, in lexicographic order
      std::vector<Edge> edges;
      for (Index x = 0; x < g.size(); ++x)
        for (Index y = x + 1; y < g.size(); ++y)
          if (g.L()(x, y) > 0.0 || g.L()(y, x) > 0.0) edges.emplace_back(x, y);
      std::vector<std::string> keys(cl_samples), bitmaps(cl_samples);
      parallel_for(cl_samples, global.threads, [&](std::size_t r) {
        const ClusterPartition cp = clusters(sample_soup(sampler, cl_alpha, global.seed, r));
        keys[r] = cp.encode(g.size());
        for (const Edge& e : edges)
          bitmaps[r] += std::binary_search(cp.open_edges.begin(), cp.open_edges.end(), e) ? '1' : '0';
      });
      std::string out = csv_line(std::vector<std::string>{"replica", "open_edges", "partition"});
      for (std::size_t r = 0; r < cl_samples; ++r)
        out += csv_line(std::vector<std::string>{std::to_string(r), bitmaps[r], keys[r]});
      emit(global, out);
      return 0;
    }
    if (wilson_cmd->parsed()) {
      const Generator g = generator_of(global);
      std::vector<Index> order;
      if (order_mode == "given") {
        order = parse_states(g, given);
      } else {
        order = full_set(g.size());
      }
      const bool loops = emit_mode == "trees+loops";
      std::vector<std::string> rows(w_samples);
      parallel_for(w_samples, global.threads, [&](std::size_t i) {
        Rng rng = stream(global.seed, {i, 0});
        Rng holds = stream(global.seed, {i, 1});
        const WilsonResult w = wilson_sample(g, order, rng, loops ? &holds : nullptr);
        std::vector<std::string> row{std::to_string(i)};
        for (Index p : w.tree.parent) row.push_back(p == kCemetery ? "D" : g.labels()[p]);
        if (loops) {
          Json erased = Json::array();
          for (const auto& rec : w.records)
            for (const auto& seg : rec.erased_loops()) {
              Json l = Json::array();
              for (std::size_t k = 0; k + 1 < seg.states.size(); ++k)
                l.push_back(Json::array({g.labels()[seg.states[k]], seg.holds[k]}));
              erased.push_back(l);
            }
          row.push_back(erased.dump());
        }
        rows[i] = csv_line(row);
      });
      std::vector<std::string> header{"sample"};
      for (const auto& l : g.labels()) header.push_back("parent_" + l);
      if (loops) header.push_back("erased_loops");
      std::string out = csv_line(header);
      for (const auto& r : rows) out += r;
      emit(global, out);
      return 0;
    }
    if (lerw_cmd->parsed()) {
      const Generator g = generator_of(global);
      std::vector<Index> p;
      for (const auto& l : prefix) p.push_back(l == "D" ? kCemetery : g.index_of(l));
      VectorXd nu = VectorXd::Zero(g.size());
      nu(p.front()) = 1.0;
      Json j{{"prefix", prefix},
             {"probability", lerw_prefix_probability(g, nu, p)},
             {"bordered", lerw_prefix_probability_bordered(g, nu, p)},
             {"jump_chain", lerw_prefix_probability_jump_chain(g, nu, p)}};
      emit(global, j.dump(2) + "\n");
      return 0;
    }
    if (verify->parsed()) {
      if (list) {
        for (const auto& s : suite_names()) std::cout << s << "\n";
        return 0;
      }
      ExperimentConfig cfg;
      if (!global.config.empty()) {
        const Json j = read_config(global.config);
        if (j.contains("L"))
          cfg.generator = global.config;
        else
          cfg = ExperimentConfig::from_json(j);
      }
      if (!suite.empty()) cfg.suite = suite;
      if (app.count("--seed")) cfg.seed = global.seed;
      if (app.count("--threads")) cfg.threads = global.threads;
      if (v_samples) cfg.samples = v_samples;
      if (!alphas.empty()) cfg.alphas = alphas;
      if (!csv.empty()) cfg.out_csv = csv;
      const VerificationReport rep = run_suite(cfg);
      emit(global, rep.to_json(true).dump(2) + "\n");
      return rep.pass ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
