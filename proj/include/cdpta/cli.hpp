#pragma once

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dsl.hpp"
#include "imc.hpp"
#include "imdp.hpp"
#include "model.hpp"
#include "oracle.hpp"
#include "solve.hpp"

namespace cdpta::cli {

// Exit codes: 0 success / true verdict, 1 false verdict, 2 validation or
// parse error, 3 usage or internal error.
constexpr int exit_ok = 0;
constexpr int exit_false = 1;
constexpr int exit_invalid = 2;
constexpr int exit_internal = 3;

inline std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void print_parse_errors(const std::string& path, const std::vector<ParseError>& errors,
                               std::ostream& err) {
  for (const auto& e : errors)
    err << path << ":" << e.span.line << ":" << e.span.column << ": " << to_string(e.kind)
        << ": " << e.message << "\n";
}

inline std::optional<Cdpta> load_model(const std::string& path, std::ostream& err) {
  auto text = read_file(path);
  if (!text) {
    err << "cannot read " << path << "\n";
    return std::nullopt;
  }
  auto result = parse(*text);
  if (!result.model) {
    print_parse_errors(path, result.errors, err);
    return std::nullopt;
  }
  return result.model;
}

inline std::set<std::string> split_targets(const std::string& csv) {
  std::set<std::string> out;
  std::string cur;
  for (char c : csv) {
    if (c == ',') {
      if (!cur.empty()) out.insert(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) out.insert(cur);
  return out;
}

/// Threshold syntax: ">= 4/5", "> 0.0" style with a rational right-hand side.
inline std::optional<std::pair<Cmp, Rat>> parse_threshold(const std::string& text) {
  std::size_t i = 0;
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  Cmp cmp;
  if (text.compare(i, 2, ">=") == 0) {
    cmp = Cmp::ge;
    i += 2;
  } else if (text.compare(i, 2, "<=") == 0) {
    cmp = Cmp::le;
    i += 2;
  } else if (i < text.size() && text[i] == '>') {
    cmp = Cmp::gt;
    i += 1;
  } else if (i < text.size() && text[i] == '<') {
    cmp = Cmp::lt;
    i += 1;
  } else {
    return std::nullopt;
  }
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  std::size_t j = text.size();
  while (j > i && std::isspace(static_cast<unsigned char>(text[j - 1]))) --j;
  auto q = rat_from_string(std::string_view(text).substr(i, j - i));
  if (!q || *q < 0 || *q > 1) return std::nullopt;
  return std::make_pair(cmp, *q);
}

struct OutputOpts {
  bool structured = false;
};

inline std::string fixed_str(double v, int prec) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(prec) << v;
  return ss.str();
}

inline void emit_result(std::ostream& out, const OutputOpts& opts, const std::string& query_name,
                        const QueryResult& r, bool quantitative) {
  if (opts.structured) {
    out << "cdpta-result/1\n";
    out << "query " << query_name << "\n";
    if (quantitative) {
      out << "value " << fixed_str(r.value, 12) << "\n";
      out << "value_rational " << rat_to_string(best_rational(r.value)) << "\n";
      if (r.verdict) out << "verdict " << (*r.verdict ? "true" : "false") << "\n";
    } else {
      out << "holds " << (r.qual_holds ? "true" : "false") << "\n";
    }
    out << "regions " << r.stats.regions << "\n";
    out << "endpoints " << r.stats.endpoints << "\n";
    out << "imdp_actions " << r.stats.imdp_actions << "\n";
    out << "imc_states " << r.stats.imc_states << "\n";
    out << "imc_transitions " << r.stats.imc_transitions << "\n";
    out << "iterations " << r.stats.iterations << "\n";
    out << "wall_ms " << fixed_str(r.stats.wall_ms, 3) << "\n";
    return;
  }
  if (quantitative) {
    out << "value = " << fixed_str(r.value, 9) << " (~" << rat_to_string(best_rational(r.value))
        << ")\n";
    if (r.verdict) out << "verdict: " << (*r.verdict ? "true" : "false") << "\n";
  } else {
    out << "holds: " << (r.qual_holds ? "true" : "false") << "\n";
  }
  out << "states: " << r.stats.imc_states << " imc (" << r.stats.regions << " regions, "
      << r.stats.endpoints << " endpoint indicators), transitions: " << r.stats.imc_transitions
      << ", iterations: " << r.stats.iterations << ", wall: " << fixed_str(r.stats.wall_ms, 3)
      << " ms\n";
}

/// Entry point shared by the binary and the tests.
inline int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"1c-cdPTA reachability via interval Markov decision processes"};
  app.require_subcommand(1);

  std::string input, targets_csv, mode_text = "max", threshold_text, dot_path, emit = "imdp";
  std::string format = "text";
  double epsilon = 1e-9;
  int level = 4;

  auto* v = app.add_subcommand("validate", "check the structural assumptions");
  v->add_option("file", input)->required();

  auto* c = app.add_subcommand("compile", "build the IMDP / IMC and print it");
  c->add_option("file", input)->required();
  c->add_option("--emit", emit)->check(CLI::IsMember({"imdp", "imc"}));
  c->add_option("--dot", dot_path);

  auto* s = app.add_subcommand("solve", "quantitative reachability");
  s->add_option("file", input)->required();
  s->add_option("--target", targets_csv)->required();
  s->add_option("--mode", mode_text)->check(CLI::IsMember({"max", "min"}));
  s->add_option("--threshold", threshold_text);
  s->add_option("--epsilon", epsilon);
  s->add_option("--format", format)->check(CLI::IsMember({"text", "structured"}));

  auto* q = app.add_subcommand("qual", "qualitative reachability");
  q->add_option("file", input)->required();
  q->add_option("--target", targets_csv)->required();
  q->add_option("--mode", mode_text)
      ->required()
      ->check(CLI::IsMember({"forall0", "exists0", "exists1", "forall1"}));
  q->add_option("--format", format)->check(CLI::IsMember({"text", "structured"}));

  auto* o = app.add_subcommand("oracle", "discretized reference values");
  o->add_option("file", input)->required();
  o->add_option("--target", targets_csv)->required();
  o->add_option("--mode", mode_text)->check(CLI::IsMember({"max", "min"}));
  o->add_option("-k,--level", level)->check(CLI::PositiveNumber);
  o->add_option("--epsilon", epsilon);
  o->add_option("--format", format)->check(CLI::IsMember({"text", "structured"}));

  std::vector<const char*> cargv;
  cargv.push_back("cdpta");
  for (const auto& a : argv) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      out << app.help();
      return exit_ok;
    }
    err << e.what() << "\n";
    return exit_internal;
  }

  OutputOpts opts{format == "structured"};
  try {
    auto model = load_model(input, err);
    if (!model) return exit_invalid;

    if (v->parsed()) {
      auto rep = validate(*model);
      if (rep.ok) {
        out << "ok: " << model->locations.size() << " locations, " << model->edges.size()
            << " edges\n";
        return exit_ok;
      }
      for (const auto& viol : rep.violations)
        err << viol.code << " at " << viol.ref << ": " << viol.message << "\n";
      return exit_invalid;
    }

    if (c->parsed()) {
      Imdp imdp = build_imdp(*model);
      if (emit == "imdp") {
        out << "imdp/1\n";
        out << "states " << imdp.states.size() << " (regions " << imdp.region_count
            << ", endpoint indicators " << imdp.endpoint_count << ")\n";
        out << "initial " << imdp.states[imdp.initial].name << "\n";
        for (std::size_t st = 0; st < imdp.states.size(); ++st)
          for (const auto& [act, row] : imdp.actions[st]) {
            out << imdp.states[st].name << " --" << act.name << "--> {";
            bool first = true;
            for (const auto& [t, iv] : row.entries) {
              if (!first) out << ", ";
              first = false;
              out << imdp.states[t].name << ": " << to_string(iv);
            }
            out << "}\n";
          }
        if (!dot_path.empty()) std::ofstream(dot_path) << imdp_to_dot(imdp, &*model);
      } else {
        Imc imc = reduce_to_imc(imdp);
        out << imc_to_text(imc);
        if (!dot_path.empty()) std::ofstream(dot_path) << imc_to_dot(imc);
      }
      return exit_ok;
    }

    auto targets = split_targets(targets_csv);
    if (s->parsed()) {
      Query query;
      query.quantitative = true;
      query.mode = mode_text == "max" ? Mode::max : Mode::min;
      if (!threshold_text.empty()) {
        auto th = parse_threshold(threshold_text);
        if (!th) {
          err << "bad threshold '" << threshold_text << "'\n";
          return exit_internal;
        }
        query.threshold = th;
      }
      SolveConfig cfg;
      cfg.epsilon = epsilon;
      QueryResult r = solve_query(*model, targets, query, cfg);
      emit_result(out, opts, "solve", r, true);
      if (!r.stats.converged) err << "warning: value iteration hit the iteration cap\n";
      if (query.threshold) {
        double lambda = to_double(query.threshold->second);
        if (std::abs(r.value - lambda) < 10 * epsilon)
          err << "UNDECIDED: value within 10*epsilon of the threshold\n";
        return *r.verdict ? exit_ok : exit_false;
      }
      return exit_ok;
    }

    if (q->parsed()) {
      Query query;
      query.quantitative = false;
      if (mode_text == "forall0") query.qual_mode = QualMode::forall0;
      else if (mode_text == "exists0") query.qual_mode = QualMode::exists0;
      else if (mode_text == "exists1") query.qual_mode = QualMode::exists1;
      else query.qual_mode = QualMode::forall1;
      QueryResult r = solve_query(*model, targets, query);
      emit_result(out, opts, "qual", r, false);
      return r.qual_holds ? exit_ok : exit_false;
    }

    if (o->parsed()) {
      auto rep = validate(*model);
      if (!rep.ok) {
        for (const auto& viol : rep.violations)
          err << viol.code << " at " << viol.ref << ": " << viol.message << "\n";
        return exit_invalid;
      }
      auto t0 = std::chrono::steady_clock::now();
      FiniteMdp mdp = discretize(*model, level);
      for (const auto& t : targets)
        if (mdp.loc_index(t) < 0) {
          err << "unknown target location " << t << "\n";
          return exit_invalid;
        }
      auto res = mdp_reach(mdp, targets, mode_text == "max" ? Mode::max : Mode::min, epsilon);
      double value = oracle_value_at(mdp, res, model->initial, Rat(0));
      double wall =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      if (opts.structured) {
        out << "cdpta-result/1\nquery oracle\n";
        out << "value " << fixed_str(value, 12) << "\n";
        out << "value_rational " << rat_to_string(best_rational(value)) << "\n";
        out << "k " << level << "\n";
        out << "states " << mdp.total_states << "\n";
        out << "iterations " << res.iterations << "\n";
        out << "wall_ms " << fixed_str(wall, 3) << "\n";
      } else {
        out << "oracle value (k=" << level << ") = " << fixed_str(value, 9) << " (~"
            << rat_to_string(best_rational(value)) << "), states " << mdp.total_states
            << ", iterations " << res.iterations << ", wall " << fixed_str(wall, 3) << " ms\n";
      }
      return exit_ok;
    }
  } catch (const Error& e) {
    std::string code = e.code();
    err << e.what() << "\n";
    if (code == "PRE_VIOLATION" || code == "PARSE" || code == "TARGET_UNKNOWN_STATE")
      return exit_invalid;
    return exit_internal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return exit_internal;
  }
  return exit_internal;
}

}  // namespace cdpta::cli
