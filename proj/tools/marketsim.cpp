// marketsim: command-line front end for the protocol engine and harness.
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "market/analytics.hpp"
#include "market/payoff.hpp"
#include "market/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace market;

namespace {

enum Exit { kOk = 0, kValidation = 1, kInvariant = 2 };

// MARKETSIM_LOG=quiet|info|debug controls diagnostics on stderr and nothing else.
int log_level() {
  static const int level = [] {
    const char* v = std::getenv("MARKETSIM_LOG");
    if (!v) return 1;
    const std::string s(v);
    if (s == "quiet" || s == "0") return 0;
    if (s == "debug" || s == "2") return 2;
    return 1;
  }();
  return level;
}

void info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << msg << '\n';
}
void debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[debug] " << msg << '\n';
}

int exit_for(ErrorCode code) {
  return code == ErrorCode::InvariantViolation || code == ErrorCode::TamperedTrace ? kInvariant : kValidation;
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::ParseError, "cannot read " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_out(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::ParseError, "cannot write " + path);
  os << text;
}

void print_report(const json& j, const std::string& text, const std::string& format) {
  if (format == "json" || format == "both") std::cout << j.dump(2) << '\n';
  if (format == "both") std::cout << '\n';
  if (format == "text" || format == "both") std::cout << text;
}

// ---- run -------------------------------------------------------------------

struct RunJob {
  std::string scenario;
  std::string out;
  RunResult result;
  std::optional<ErrorCode> error;
  std::string error_text;
};

void run_job(RunJob& job, std::optional<std::uint64_t> seed) {
  try {
    const Scenario sc = load_scenario(job.scenario);
    job.result = run_scenario(sc, seed);
  } catch (const ScenarioError& e) {
    job.error = e.code();
    for (const auto& p : e.problems()) job.error_text += "  " + p + "\n";
    if (job.error_text.empty()) job.error_text = std::string("  ") + e.what() + "\n";
  } catch (const ProtocolError& e) {
    job.error = e.code();
    job.error_text = std::string("  ") + e.what() + "\n";
  }
}

int cmd_run(const std::vector<std::string>& scenarios, std::optional<std::uint64_t> seed, const std::string& out,
            const std::string& out_dir, unsigned jobs) {
  if (scenarios.size() > 1 && !out.empty()) {
    std::cerr << "--out takes a single scenario; use --out-dir for several\n";
    return kValidation;
  }
  std::vector<RunJob> work(scenarios.size());
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    work[i].scenario = scenarios[i];
    if (!out_dir.empty()) {
      work[i].out = (fs::path(out_dir) / (fs::path(scenarios[i]).stem().string() + ".jsonl")).string();
    } else {
      work[i].out = out;
    }
  }
  // Each scenario owns its engine; workers share nothing but the job slots.
  if (jobs <= 1 || work.size() <= 1) {
    for (auto& j : work) run_job(j, seed);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::min<std::size_t>(jobs, work.size()); ++t) {
      pool.emplace_back([&] {
        for (std::size_t i; (i = next++) < work.size();) run_job(work[i], seed);
      });
    }
    for (auto& th : pool) th.join();
  }
  if (!out_dir.empty()) fs::create_directories(out_dir);

  int rc = kOk;
  for (auto& j : work) {
    if (j.error) {
      std::cerr << j.scenario << ": " << to_string(*j.error) << "\n" << j.error_text;
      rc = std::max(rc, exit_for(*j.error));
      continue;
    }
    const auto& r = j.result;
    if (j.out.empty() && work.size() == 1) {
      // Trace to stdout only when asked for it explicitly; otherwise the summary.
      std::cout << r.summary.dump(2) << '\n';
    } else {
      write_out(j.out, r.trace_text);
      info(j.scenario + ": trace written to " + (j.out == "-" ? std::string("stdout") : j.out));
      if (j.out != "-") std::cout << r.summary.dump(2) << '\n';
    }
    debug(j.scenario + ": " + std::to_string(r.rejected_ops) + " rejected operations");
    for (const auto& f : r.expectation_failures) std::cerr << j.scenario << ": expectation failed: " << f << '\n';
    if (r.aborted) {
      std::cerr << j.scenario << ": run aborted: " << r.abort_reason << '\n';
      rc = std::max<int>(rc, kInvariant);
    } else if (!r.expectation_failures.empty()) {
      rc = std::max<int>(rc, kValidation);
    }
  }
  return rc;
}

// ---- verify / report / case -------------------------------------------------

int cmd_verify(const std::string& path, bool no_replay, const std::string& format) {
  const auto text = read_file(path);
  const auto rep = verify_trace(text, !no_replay);
  std::ostringstream os;
  if (rep.ok) {
    os << "ok: " << rep.events << " events, " << rep.sessions << " sessions, " << rep.transitions << " transitions"
       << (rep.replayed ? ", replay identical" : "") << '\n';
  } else {
    os << to_string(*rep.code) << " at " << (*rep.bad_seq < 0 ? std::string("header") : "seq " + std::to_string(*rep.bad_seq))
       << ": " << rep.detail << '\n';
  }
  print_report(rep.to_json(), os.str(), format);
  return rep.ok ? kOk : exit_for(*rep.code);
}

int cmd_report(const std::string& path, bool governance, const std::string& format) {
  const auto events = read_trace_events(read_file(path));
  const auto r = trace_report(events, governance);
  print_report(r, render_report_text(r), format);
  return kOk;
}

int cmd_case(const std::string& path, std::uint64_t id) {
  const auto events = read_trace_events(read_file(path));
  json doc = {{"case", id},     {"opened", nullptr}, {"evidence", json::array()}, {"rounds", json::array()},
              {"appeals", json::array()}, {"ruling", nullptr}, {"events", json::array()}};
  std::map<std::int64_t, json> rounds;
  bool found = false;
  for (const auto& ev : events) {
    if (ev["module"] != "arbitration") continue;
    const auto& p = ev["payload"];
    if (!p.contains("case") || p["case"] != id) continue;
    found = true;
    const auto& k = ev["kind"].get_ref<const std::string&>();
    json entry = {{"seq", ev["seq"]}, {"day", ev["day"]}, {"kind", k}, {"payload", p}};
    doc["events"].push_back(entry);
    if (k == "case_opened") {
      doc["opened"] = entry;
    } else if (k == "evidence") {
      doc["evidence"].push_back({{"day", ev["day"]}, {"submitter", p["submitter"]}, {"hash", p["hash"]}});
    } else if (k == "round_opened") {
      rounds[p["round"].get<std::int64_t>()] = {{"opened", p}, {"ballots", json::object()}};
    } else if (k == "commit" || k == "reveal" || k == "absent") {
      auto& b = rounds[p["round"].get<std::int64_t>()]["ballots"][std::to_string(p["juror"].get<std::uint64_t>())];
      if (k == "commit") b["commitment"] = p["hash"];
      if (k == "reveal") {
        b["vote"] = p["vote"];
        b["salt"] = p["salt"];
      }
      if (k == "absent") b["absent"] = true;
    } else if (k == "tally") {
      rounds[p["round"].get<std::int64_t>()]["tally"] = p;
    } else if (k == "appeal") {
      doc["appeals"].push_back(p);
    } else if (k == "ruling_executed" || k == "internal_ruling") {
      doc[k == "internal_ruling" ? "internal_ruling" : "ruling"] = p;
    }
  }
  if (!found) fail(ErrorCode::UnknownCase, "no events for case " + std::to_string(id));
  for (auto& [k, r] : rounds) doc["rounds"].push_back(r);
  std::cout << doc.dump(2) << '\n';
  return kOk;
}

// ---- analytics -------------------------------------------------------------

int cmd_equilibrium(const std::string& params_path, const std::string& format) {
  PayoffParams params;
  if (!params_path.empty()) {
    json j;
    try {
      j = json::parse(read_file(params_path));
    } catch (const json::parse_error& e) {
      fail(ErrorCode::ParseError, std::string("params: ") + e.what());
    }
    params = PayoffParams::from_json(j);
  }
  const auto report = analyze_game(params);
  print_report(report, render_game_text(report), format);
  return kOk;
}

int cmd_thresholds(std::optional<double> lambda, const std::string& trace_path, std::vector<double> thresholds,
                   std::size_t samples, std::uint64_t seed, const std::string& cost_path, const std::string& format) {
  CostModel cost;
  if (!cost_path.empty()) {
    try {
      cost = CostModel::from_json(json::parse(read_file(cost_path)));
    } catch (const json::parse_error& e) {
      fail(ErrorCode::ParseError, std::string("cost model: ") + e.what());
    }
  }
  json report = json::object();
  std::vector<double> values;
  double lam = 0;
  if (lambda) {
    lam = *lambda;
    values = sample_values(ExpModel{lam}, samples, seed);
    report["source"] = {{"kind", "model"}, {"samples", samples}, {"seed", seed}};
  } else {
    const auto events = read_trace_events(read_file(trace_path));
    const auto tv = values_from_trace(events);
    values = tv.exchange_values_usd;
    if (values.empty()) fail(ErrorCode::EmptyInput, "trace has no exchange values");
    double sum = 0;
    for (double v : values) sum += v;
    lam = static_cast<double>(values.size()) / sum;  // method of moments
    report["source"] = {{"kind", "trace"}, {"path", trace_path}, {"exchanges", values.size()}};
    report["routing"] = {{"internal", tv.internal_cases},
                         {"external", tv.external_cases},
                         {"internal_at_or_below", tv.internal_at_or_below},
                         {"external_above", tv.external_above}};
  }
  const auto st = exp_stats(lam);
  report["model"] = {{"lambda", lam}, {"mean", st.mean}, {"median", st.median}, {"frac_below_mean", st.frac_below_mean}};
  report["cost_model"] = cost.to_json();
  if (thresholds.empty()) thresholds.push_back(st.mean);
  report["thresholds"] = json::array();
  for (double t : thresholds) report["thresholds"].push_back(threshold_report(values, t, cost).to_json());
  print_report(report, render_threshold_text(report), format);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic marketplace protocol engine and simulation harness"};
  app.require_subcommand(1);
  std::string format = "both";

  auto* run = app.add_subcommand("run", "Run scenario(s) and write the trace");
  std::vector<std::string> scenarios;
  std::optional<std::uint64_t> seed;
  std::string out, out_dir;
  unsigned jobs = 1;
  run->add_option("scenario", scenarios, "Scenario file(s)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--out", out, "Trace output path ('-' for stdout)");
  run->add_option("--out-dir", out_dir, "Directory for one trace per scenario");
  run->add_option("-j,--jobs", jobs, "Worker threads for several scenarios")->check(CLI::Range(1u, 64u));

  auto* eq = app.add_subcommand("verify-equilibrium", "Analyze the buyer/seller honesty game");
  std::string params_path;
  eq->add_option("--params", params_path, "JSON payoff parameters")->check(CLI::ExistingFile);
  eq->add_option("--format", format, "json|text|both")->check(CLI::IsMember({"json", "text", "both"}));

  auto* th = app.add_subcommand("analyze-thresholds", "Internal/external routing threshold analysis");
  std::optional<double> lambda;
  std::string input_trace, cost_path;
  std::vector<double> thresholds;
  std::size_t samples = 10000;
  std::uint64_t th_seed = 1;
  auto* lam_opt = th->add_option("--lambda", lambda, "Exponential rate of exchange values (1/USD)");
  auto* trace_opt = th->add_option("--input-trace", input_trace, "Trace to take values from")->check(CLI::ExistingFile);
  lam_opt->excludes(trace_opt);
  th->add_option("--threshold", thresholds, "USD threshold(s) to evaluate (default: the mean)");
  th->add_option("--samples", samples, "Samples drawn with --lambda")->check(CLI::Range(std::size_t{1}, std::size_t{100000000}));
  th->add_option("--seed", th_seed, "Sampling seed with --lambda");
  th->add_option("--cost", cost_path, "JSON cost model")->check(CLI::ExistingFile);
  th->add_option("--format", format, "json|text|both")->check(CLI::IsMember({"json", "text", "both"}));

  auto* ver = app.add_subcommand("verify", "Verify a trace: chain, conservation, legality, replay");
  std::string trace_path;
  bool no_replay = false;
  ver->add_option("trace", trace_path)->required()->check(CLI::ExistingFile);
  ver->add_flag("--no-replay", no_replay, "Skip re-running the embedded scenario");
  ver->add_option("--format", format, "json|text|both")->check(CLI::IsMember({"json", "text", "both"}));

  auto* rep = app.add_subcommand("report", "Outcome tables from a trace");
  bool governance = false;
  rep->add_option("trace", trace_path)->required()->check(CLI::ExistingFile);
  rep->add_flag("--governance", governance, "Include proposal lifecycle tables");
  rep->add_option("--format", format, "json|text|both")->check(CLI::IsMember({"json", "text", "both"}));

  auto* cs = app.add_subcommand("case", "Dump one dispute case transcript as JSON");
  std::uint64_t case_id = 0;
  cs->add_option("trace", trace_path)->required()->check(CLI::ExistingFile);
  cs->add_option("id", case_id, "Case id")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kValidation;
  }

  try {
    if (*run) return cmd_run(scenarios, seed, out, out_dir, jobs);
    if (*eq) return cmd_equilibrium(params_path, format);
    if (*th) {
      if (!lambda && input_trace.empty()) {
        std::cerr << "analyze-thresholds needs --lambda or --input-trace\n";
        return kValidation;
      }
      return cmd_thresholds(lambda, input_trace, thresholds, samples, th_seed, cost_path, format);
    }
    if (*ver) return cmd_verify(trace_path, no_replay, format);
    if (*rep) return cmd_report(trace_path, governance, format);
    if (*cs) return cmd_case(trace_path, case_id);
  } catch (const ScenarioError& e) {
    std::cerr << to_string(e.code()) << '\n';
    for (const auto& p : e.problems()) std::cerr << "  " << p << '\n';
    return exit_for(e.code());
  } catch (const ProtocolError& e) {
    std::cerr << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "ValidationError: " << e.what() << '\n';
    return kValidation;
  }
  return kOk;
}
