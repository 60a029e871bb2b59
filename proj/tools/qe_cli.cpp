#include <qelim.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

struct Config {
  std::string mode = "poly";
  std::string ordering = "brown";
  std::string traversal = "depth";
  std::string ec = "single";
  double share_threshold = 0.5;
  bool groebner = false;
  bool witness = false;
  bool stats = false;
  double timeout = 0.0;
  std::string output = "extended";
};

void add_common_flags(CLI::App *cmd, Config &cfg) {
  cmd->add_option("--mode", cfg.mode, "poly|whole|vts|cad");
  cmd->add_option("--ordering", cfg.ordering,
                  "brown|sotd|ndrr|greedy|ec|user:<v1,v2,...>");
  cmd->add_option("--traversal", cfg.traversal, "depth|breadth");
  cmd->add_option("--ec", cfg.ec, "off|single|multiple-unsafe");
  cmd->add_option("--share-threshold", cfg.share_threshold,
                  "reuse threshold in [0,1]");
  cmd->add_flag("--groebner", cfg.groebner, "preprocess equation systems");
  cmd->add_flag("--witness", cfg.witness, "emit a verified sample point");
  cmd->add_flag("--stats", cfg.stats, "emit the statistics JSON");
  cmd->add_option("--timeout", cfg.timeout, "time budget in seconds");
  cmd->add_option("--output", cfg.output, "tarski|extended");
}

// Applies the configuration; returns an empty string or the error message.
std::string configure(qe_engine *e, const Config &cfg, const std::string &mode) {
  const std::pair<const char *, std::string> kv[] = {
      {"mode", mode},
      {"ordering", cfg.ordering},
      {"traversal", cfg.traversal},
      {"ec", cfg.ec},
      {"share-threshold", std::to_string(cfg.share_threshold)},
      {"groebner", cfg.groebner ? "on" : "off"},
      {"witness", cfg.witness ? "on" : "off"},
      {"timeout", std::to_string(cfg.timeout)},
      {"output", cfg.output},
  };
  for (auto &[k, v] : kv)
    if (qe_engine_set(e, k, v.c_str()) != QE_OK)
      return qe_last_error(e);
  return "";
}

int run_one(const std::string &file, const Config &cfg) {
  qe_engine *e = qe_engine_new();
  std::string err = configure(e, cfg, cfg.mode);
  if (!err.empty()) {
    std::cerr << "error: " << err << "\n";
    qe_engine_free(e);
    return 1;
  }
  qe_result *res = nullptr;
  qe_status st = qe_run_file(e, file.c_str(), &res);
  int rc = 1;
  switch (st) {
  case QE_OK:
  case QE_UNVERIFIED:
    std::cout << qe_result_formula(res) << "\n";
    if (cfg.witness && qe_result_witness(res))
      std::cout << qe_result_witness(res) << "\n";
    if (cfg.stats)
      std::cout << qe_result_stats_json(res) << "\n";
    rc = st == QE_UNVERIFIED ? 4 : 0;
    break;
  case QE_PARSE_ERROR:
    std::cerr << "parse error: " << qe_last_error(e) << "\n";
    rc = 2;
    break;
  case QE_TIMEOUT:
    std::cerr << "timeout: " << qe_last_error(e) << "\n";
    rc = 3;
    break;
  default:
    std::cerr << "error: " << qe_last_error(e) << "\n";
    rc = 1;
    break;
  }
  qe_result_free(res);
  qe_engine_free(e);
  return rc;
}

struct BenchRow {
  std::string problem;
  std::string mode;
  std::string status;
  long time_ms = 0;
  long proj_polys = 0, ecs = 0, cells = 0, leaf_cells = 0, true_cells = 0,
       curtains = 0;
};

BenchRow bench_one(const std::string &file, const std::string &mode,
                   const Config &cfg) {
  BenchRow row;
  row.problem = std::filesystem::path(file).stem().string();
  row.mode = mode;
  qe_engine *e = qe_engine_new();
  std::string err = configure(e, cfg, mode);
  if (!err.empty()) {
    row.status = "error";
    qe_engine_free(e);
    return row;
  }
  qe_result *res = nullptr;
  auto t0 = std::chrono::steady_clock::now();
  qe_status st = qe_run_file(e, file.c_str(), &res);
  row.time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  switch (st) {
  case QE_OK:
    row.status = "ok";
    break;
  case QE_UNVERIFIED:
    row.status = "unverified";
    break;
  case QE_PARSE_ERROR:
    row.status = "parse_error";
    break;
  case QE_TIMEOUT:
    row.status = "timeout";
    // budget exhausted; report the budget, not the overshoot
    row.time_ms = static_cast<long>(cfg.timeout * 1000.0);
    break;
  case QE_UNSUPPORTED:
    row.status = "unsupported";
    break;
  default:
    row.status = "error";
    break;
  }
  if (res) {
    auto j = nlohmann::json::parse(qe_result_stats_json(res));
    row.proj_polys = j["proj_poly_count"].get<long>();
    row.ecs = j["ec_count"].get<long>();
    row.cells = j["cells_total"].get<long>();
    row.leaf_cells = j["cells_leaf"].get<long>();
    row.true_cells = j["true_cells"].get<long>();
    row.curtains = j["curtain_events"].get<long>();
  }
  qe_result_free(res);
  qe_engine_free(e);
  return row;
}

int run_bench(const std::string &dir, const Config &cfg,
              const std::string &modes_csv, int jobs) {
  std::vector<std::string> modes;
  {
    std::stringstream ss(modes_csv);
    std::string m;
    while (std::getline(ss, m, ','))
      if (!m.empty())
        modes.push_back(m);
  }
  std::vector<std::string> files;
  std::error_code ec;
  for (auto &ent : std::filesystem::directory_iterator(dir, ec))
    if (ent.is_regular_file() && ent.path().extension() == ".qe")
      files.push_back(ent.path().string());
  if (ec) {
    std::cerr << "error: cannot read " << dir << "\n";
    return 1;
  }
  std::sort(files.begin(), files.end());

  struct Job {
    std::string file, mode;
  };
  std::vector<Job> todo;
  for (auto &f : files)
    for (auto &m : modes)
      todo.push_back({f, m});
  std::vector<BenchRow> rows(todo.size());

  if (jobs < 1)
    jobs = 1;
  std::mutex mu;
  size_t next = 0;
  auto worker = [&]() {
    for (;;) {
      size_t i;
      {
        std::lock_guard<std::mutex> lk(mu);
        if (next >= todo.size())
          return;
        i = next++;
      }
      rows[i] = bench_one(todo[i].file, todo[i].mode, cfg);
    }
  };
  std::vector<std::thread> pool;
  for (int i = 1; i < jobs; ++i)
    pool.emplace_back(worker);
  worker();
  for (auto &t : pool)
    t.join();

  std::cout << "problem,mode,ordering,status,time_ms,proj_polys,ecs,cells,"
               "leaf_cells,true_cells,curtains\n";
  for (auto &r : rows)
    std::cout << r.problem << "," << r.mode << "," << cfg.ordering << ","
              << r.status << "," << r.time_ms << "," << r.proj_polys << ","
              << r.ecs << "," << r.cells << "," << r.leaf_cells << ","
              << r.true_cells << "," << r.curtains << "\n";
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Quantifier elimination over the reals"};
  app.require_subcommand(1);

  Config run_cfg;
  std::string run_file;
  CLI::App *run = app.add_subcommand("run", "eliminate quantifiers from one file");
  run->add_option("file", run_file, "problem file")->required();
  add_common_flags(run, run_cfg);

  Config bench_cfg;
  std::string bench_dir;
  std::string bench_modes = "poly,whole,vts,cad";
  int jobs = 1;
  CLI::App *bench = app.add_subcommand("bench", "run a corpus, emit CSV");
  bench->add_option("dir", bench_dir, "directory of .qe files")->required();
  add_common_flags(bench, bench_cfg);
  bench->add_option("--modes", bench_modes, "comma-separated mode list");
  bench->add_option("--jobs", jobs, "parallel workers (default 1)");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed())
    return run_one(run_file, run_cfg);
  return run_bench(bench_dir, bench_cfg, bench_modes, jobs);
}
