#include "veristat/cli.hpp"

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "veristat/engine.hpp"
#include "veristat/error.hpp"
#include "veristat/inspect.hpp"
#include "veristat/sensitivity.hpp"
#include "veristat/spec.hpp"

namespace veristat {

namespace fs = std::filesystem;

namespace {

struct RunArgs {
  std::string spec_path;
  std::string data_dir;
  std::string interaction;
  std::string replay;
  std::string transcript;
  std::string report;
  std::string out_dir;
};

void add_run_options(CLI::App& cmd, RunArgs& a) {
  cmd.add_option("spec", a.spec_path, "Analysis spec (.evs)")->required();
  cmd.add_option("--data-dir", a.data_dir, "Directory dataset sources resolve against (default: the spec's directory)");
  cmd.add_option("--interaction", a.interaction, "prompt, assume_yes, assume_no or replay")
      ->check(CLI::IsMember({"prompt", "assume_yes", "assume_no", "replay"}));
  cmd.add_option("--replay", a.replay, "Answers file for plot confirmations; implies --interaction replay");
  cmd.add_option("--transcript", a.transcript, "Write plot confirmation answers to this file");
  cmd.add_option("--report", a.report, "JSON report path (default: <out-dir>/report.json)");
  cmd.add_option("--out-dir", a.out_dir, "Directory for the report and plot files");
}

fs::path default_out_dir() {
  if (const char* env = std::getenv("VERISTAT_OUT_DIR"); env && *env) return env;
  return "evidence";
}

InteractionPolicy make_policy(const RunArgs& a, bool interactive_terminal) {
  InteractionPolicy policy;
  if (!a.interaction.empty()) {
    policy.mode = *parse_interaction_mode(a.interaction);
  } else if (!a.replay.empty()) {
    policy.mode = InteractionMode::replay;
  } else {
    policy.mode = interactive_terminal ? InteractionMode::prompt : InteractionMode::assume_yes;
  }
  if (!a.replay.empty()) policy.replay_source = a.replay;
  if (!a.transcript.empty()) policy.transcript_sink = a.transcript;
  policy.validate();
  return policy;
}

fs::path data_root_for(const RunArgs& a) {
  if (!a.data_dir.empty()) return a.data_dir;
  const fs::path parent = fs::path(a.spec_path).parent_path();
  return parent.empty() ? fs::path(".") : parent;
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream file(path, std::ios::binary);
  if (!file) throw LoadError("cannot write report '" + path.string() + "'");
  file << j.dump(2) << "\n";
}

// Spec problems outrank data problems, which outrank a plain failed establishment.
int exit_code_for(const std::vector<ReportIssue>& issues, bool established, std::ostream& err) {
  int code = established ? kExitEstablished : kExitNotEstablished;
  for (const auto& issue : issues) {
    err << "veristat: " << issue.subject << ": " << issue.message << "\n";
    if (issue.category == ReportIssue::Category::spec) {
      code = kExitSpecError;
    } else if (issue.category == ReportIssue::Category::data && code != kExitSpecError) {
      code = kExitDataError;
    }
  }
  return code;
}

AnalysisSpec load_linted_spec(const std::string& path, std::ostream& err) {
  AnalysisSpec spec = parse_spec_file(path);
  const auto findings = lint_spec(spec);
  for (const auto& f : findings) err << path << ": " << to_string(f) << "\n";
  if (has_errors(findings)) throw SpecError("spec has lint errors");
  return spec;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, std::istream& in) {
  CLI::App app{"Establish data analysis statements and their premises against data", "veristat"};
  app.require_subcommand(1);
  app.fallthrough(false);

  RunArgs validate_args;
  auto* validate_cmd = app.add_subcommand("validate", "Establish every root of a spec and write an evidence report");
  add_run_options(*validate_cmd, validate_args);

  std::string spec_path;
  std::string root;
  auto* tree_cmd = app.add_subcommand("tree", "Print the premise tree of a statement (reads no data)");
  tree_cmd->add_option("spec", spec_path, "Analysis spec (.evs)")->required();
  tree_cmd->add_option("root", root, "Statement id")->required();

  std::string format = "dot";
  auto* render_cmd = app.add_subcommand("render", "Render the premise tree as Graphviz DOT or text (reads no data)");
  render_cmd->add_option("spec", spec_path, "Analysis spec (.evs)")->required();
  render_cmd->add_option("root", root, "Statement id")->required();
  render_cmd->add_option("--format", format, "dot or text")->check(CLI::IsMember({"dot", "text"}));

  bool properties = false;
  auto* inspect_cmd = app.add_subcommand("inspect", "Describe a statement's check (reads no data)");
  inspect_cmd->add_option("spec", spec_path, "Analysis spec (.evs)")->required();
  inspect_cmd->add_option("id", root, "Statement id")->required();
  inspect_cmd->add_flag("--properties", properties, "Also list properties its premises guarantee");

  auto* lint_cmd = app.add_subcommand("lint", "Report spec errors and warnings (reads no data)");
  lint_cmd->add_option("spec", spec_path, "Analysis spec (.evs)")->required();

  RunArgs sens_args;
  std::string plan_path;
  std::uint64_t seed = 0;
  auto* sens_cmd = app.add_subcommand("sensitivity", "Re-establish a spec on perturbed copies of its data");
  add_run_options(*sens_cmd, sens_args);
  sens_cmd->add_option("--plan", plan_path, "Perturbation plan (perturb blocks)")->required();
  sens_cmd->add_option("--seed", seed, "Seed for plan entries that do not set one");

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("veristat");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitEstablished;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitEstablished;
  } catch (const CLI::ParseError& e) {
    err << "veristat: " << e.what() << "\n\n";
    const auto used = app.get_subcommands();
    err << (used.empty() ? app.help() : used.front()->help());
    return kExitSpecError;
  }

  const bool interactive_terminal = &in == &std::cin && ::isatty(STDIN_FILENO);

  try {
    if (tree_cmd->parsed() || render_cmd->parsed()) {
      const AnalysisSpec spec = load_linted_spec(spec_path, err);
      const PremiseTree tree = premise_tree(spec, root);
      out << ((tree_cmd->parsed() || format == "text") ? render_text_tree(tree) : render_dot(tree));
      return kExitEstablished;
    }
    if (inspect_cmd->parsed()) {
      const AnalysisSpec spec = parse_spec_file(spec_path);
      out << describe_check(spec, root);
      if (properties) {
        const auto props = infer_properties(spec, root);
        out << "guaranteed by premises (rules v" << kInferenceRulesVersion << "):\n";
        if (props.empty()) out << "  none\n";
        for (const auto& p : props) out << "  " << to_string(p) << "\n";
      }
      return kExitEstablished;
    }
    if (lint_cmd->parsed()) {
      const AnalysisSpec spec = parse_spec_file(spec_path);
      const auto findings = lint_spec(spec);
      for (const auto& f : findings) out << to_string(f) << "\n";
      if (findings.empty()) out << "no findings\n";
      return has_errors(findings) ? kExitSpecError : kExitEstablished;
    }

    const RunArgs& run = validate_cmd->parsed() ? validate_args : sens_args;
    const AnalysisSpec spec = load_linted_spec(run.spec_path, err);
    const InteractionPolicy policy = make_policy(run, interactive_terminal);
    EngineOptions options;
    options.out_dir = run.out_dir.empty() ? default_out_dir() : fs::path(run.out_dir);
    const fs::path report_path = run.report.empty() ? options.out_dir / "report.json" : fs::path(run.report);
    const DataContext data = DataContext::load(spec, data_root_for(run));

    if (validate_cmd->parsed()) {
      Interaction interaction(policy, in, out);
      const EvidenceReport report = establish(spec, data, interaction, options);
      interaction.flush_transcript();
      write_json(report_path, to_json(report));
      out << render_summary(report);
      out << "report: " << report_path.string() << "\n";
      return exit_code_for(report.issues, report.established, err);
    }

    const auto plan = parse_plan_file(plan_path, seed);
    const SensitivityReport report = run_sensitivity(spec, data, plan, policy, options);
    write_json(report_path, to_json(report));
    out << render_summary(report);
    out << "report: " << report_path.string() << "\n";
    const int code = exit_code_for(report.baseline.issues, report.baseline.established, err);
    if (code != kExitEstablished) return code;
    return report.uncaught.empty() ? kExitEstablished : kExitNotEstablished;
  } catch (const SpecError& e) {
    err << "veristat: " << e.what() << "\n";
    return kExitSpecError;
  } catch (const InteractionError& e) {
    err << "veristat: " << e.what() << "\n";
    return kExitSpecError;
  } catch (const Error& e) {
    err << "veristat: " << e.what() << "\n";
    return kExitDataError;
  } catch (const fs::filesystem_error& e) {
    err << "veristat: " << e.what() << "\n";
    return kExitDataError;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return run_cli(args, out, err, std::cin);
}

}  // namespace veristat
