#include "wsireg/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <sstream>

#include "wsireg/error.hpp"
#include "wsireg/io.hpp"
#include "wsireg/parallel.hpp"
#include "wsireg/preprocess.hpp"

namespace wsireg::pipeline {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json transform_json(const RigidTransform2D& t) {
  return {{"theta", t.theta}, {"dx", t.dx}, {"dy", t.dy}};
}

RigidTransform2D transform_from(const ordered_json& j) {
  return {j.at("theta").get<double>(), j.at("dx").get<double>(),
          j.at("dy").get<double>()};
}

double ms_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

std::string slice_name(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04zu.png", i);
  return buf;
}

}  // namespace

void apply_config_entry(Config& cfg, const std::string& key,
                        const std::string& value) {
  const auto as_d = [&] { return std::stod(value); };
  const auto as_i = [&] { return std::stoi(value); };
  if (key == "blur_sigma") cfg.blur_sigma = as_d();
  else if (key == "morph_radius") cfg.morph_radius = as_i();
  else if (key == "ms_phases") cfg.ms.phases = as_i();
  else if (key == "ms_lambda") cfg.ms.lambda = as_d();
  else if (key == "ms_sweeps") cfg.ms.sweeps = as_i();
  else if (key == "ms_t_start") cfg.ms.t_start = as_d();
  else if (key == "ms_t_end") cfg.ms.t_end = as_d();
  else if (key == "ms_levels") cfg.ms.levels = as_i();
  else if (key == "theta_max_deg") cfg.global.theta_max_deg = as_d();
  else if (key == "theta_step_deg") cfg.global.theta_step_deg = as_d();
  else if (key == "trans_frac") cfg.global.trans_frac = as_d();
  else if (key == "trans_step_div") cfg.global.trans_step_div = as_i();
  else if (key == "refine_factor") cfg.global.refine_factor = as_i();
  else if (key == "est_level") cfg.global.est_level = as_i();
  else if (key == "roi_cx") cfg.roi.cx = as_d();
  else if (key == "roi_cy") cfg.roi.cy = as_d();
  else if (key == "roi_width") cfg.roi.width = as_d();
  else if (key == "roi_height") cfg.roi.height = as_d();
  else if (key == "levels") cfg.levels = as_i();
  else if (key == "sift_layers") cfg.sift.layers_per_octave = as_i();
  else if (key == "sift_beta") cfg.sift.beta = as_d();
  else if (key == "window") cfg.window = as_i();
  else if (key == "seed") cfg.seed = std::stoull(value);
  else if (key == "threads") cfg.threads = as_i();
  else throw InvalidArgument("unknown config key: " + key);
}

void apply_config_file(Config& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!key.empty()) apply_config_entry(cfg, key, value);
  }
}

std::string config_to_json(const Config& cfg) {
  ordered_json j;
  j["blur_sigma"] = cfg.blur_sigma;
  j["morph_radius"] = cfg.morph_radius;
  j["ms_phases"] = cfg.ms.phases;
  j["ms_lambda"] = cfg.ms.lambda;
  j["ms_sweeps"] = cfg.ms.sweeps;
  j["ms_t_start"] = cfg.ms.t_start;
  j["ms_t_end"] = cfg.ms.t_end;
  j["ms_levels"] = cfg.ms.levels;
  j["theta_max_deg"] = cfg.global.theta_max_deg;
  j["theta_step_deg"] = cfg.global.theta_step_deg;
  j["trans_frac"] = cfg.global.trans_frac;
  j["trans_step_div"] = cfg.global.trans_step_div;
  j["refine_factor"] = cfg.global.refine_factor;
  j["est_level"] = cfg.global.est_level;
  j["roi"] = {{"cx", cfg.roi.cx},
              {"cy", cfg.roi.cy},
              {"width", cfg.roi.width},
              {"height", cfg.roi.height}};
  j["levels"] = cfg.levels;
  j["sift_layers"] = cfg.sift.layers_per_octave;
  j["sift_beta"] = cfg.sift.beta;
  j["window"] = cfg.window;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  return j.dump(2);
}

std::vector<GrayImage> preprocess_stage(const std::vector<GrayImage>& slices,
                                        const Config& cfg) {
  std::vector<GrayImage> cleaned(slices.size());
  std::string failure;
  std::mutex failure_mutex;
  parallel_for(static_cast<std::int64_t>(slices.size()), [&](std::int64_t i) {
    try {
      cleaned[i] = preprocess::clean_tissue(
          slices[i], {cfg.blur_sigma, cfg.morph_radius, 0.25});
    } catch (const BlankSlideError&) {
      std::lock_guard<std::mutex> lk(failure_mutex);
      if (failure.empty())
        failure = "slice " + std::to_string(i) + " looks blank";
    }
  });
  if (!failure.empty()) throw BlankSlideError(failure);
  return cleaned;
}

std::vector<ms::LabelImage> segment_stage(const std::vector<GrayImage>& cleaned,
                                          const Config& cfg) {
  std::vector<ms::LabelImage> labels(cleaned.size());
  parallel_for(static_cast<std::int64_t>(cleaned.size()), [&](std::int64_t i) {
    ms::MsConfig mc = cfg.ms;
    mc.seed = cfg.seed + static_cast<std::uint64_t>(i);
    labels[i] = ms::mc_segment(cleaned[i], mc);
  });
  return labels;
}

global_align::GlobalAlignResult global_stage(
    const std::vector<GrayImage>& cleaned,
    const std::vector<ms::LabelImage>& labels, const Config& cfg) {
  return global_align::align_whole_tissue(cleaned, labels, cfg.global);
}

RunResult run_on_stack(const std::vector<GrayImage>& slices,
                       const std::vector<BinaryMask>* masks,
                       const Config& cfg) {
  if (slices.empty()) throw InvalidArgument("run_on_stack: empty stack");
  if (cfg.threads > 0) set_threads(cfg.threads);
  if (masks && masks->size() != slices.size())
    throw InvalidArgument("run_on_stack: mask count does not match slices");

  RunResult r;
  r.cleaned = preprocess_stage(slices, cfg);
  r.labels = segment_stage(r.cleaned, cfg);
  r.global = global_stage(r.cleaned, r.labels, cfg);

  roi_register::RegistrationConfig rc;
  rc.levels = cfg.levels;
  rc.sift = cfg.sift;
  auto stack_result = roi_register::register_stack(r.global.registered,
                                                   cfg.roi, rc);
  r.roi_chain = stack_result.chain;

  // Total transform: global then regional, applied to the cleaned original
  // with a single warp.
  r.total_chain = r.roi_chain;
  for (std::size_t i = 0; i < slices.size(); ++i) {
    r.total_chain.cumulative[i] =
        compose(r.roi_chain.cumulative[i], r.global.cumulative[i]);
  }
  r.final_slices.reserve(slices.size());
  for (std::size_t i = 0; i < slices.size(); ++i)
    r.final_slices.push_back(
        warp_image(r.cleaned[i], r.total_chain.cumulative[i], Interp::bilinear));

  if (masks) r.report = eval::evaluate_chain(*masks, r.total_chain, cfg.window);
  return r;
}

std::string chain_to_json(const roi_register::RegistrationChain& chain) {
  ordered_json slices = ordered_json::array();
  for (std::size_t i = 0; i < chain.cumulative.size(); ++i) {
    ordered_json entry;
    entry["index"] = i;
    entry["cumulative"] = transform_json(chain.cumulative[i]);
    ordered_json levels = ordered_json::array();
    if (i > 0 && i - 1 < chain.pair_levels.size()) {
      for (const auto& lr : chain.pair_levels[i - 1]) {
        levels.push_back({{"level", lr.level},
                          {"theta", lr.transform.theta},
                          {"dx", lr.transform.dx},
                          {"dy", lr.transform.dy},
                          {"candidates", lr.candidate_count},
                          {"ssd", lr.chosen_ssd},
                          {"fallback", lr.fallback}});
      }
    }
    entry["levels"] = std::move(levels);
    slices.push_back(std::move(entry));
  }
  ordered_json root;
  root["slices"] = std::move(slices);
  root["roi"] = {{"cx", chain.roi.cx},
                 {"cy", chain.roi.cy},
                 {"width", chain.roi.width},
                 {"height", chain.roi.height}};
  return root.dump(2);
}

roi_register::RegistrationChain chain_from_json_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open chain " + path.string());
  ordered_json root;
  in >> root;
  roi_register::RegistrationChain chain;
  if (root.contains("roi")) {
    chain.roi = {root["roi"].at("cx").get<double>(),
                 root["roi"].at("cy").get<double>(),
                 root["roi"].at("width").get<double>(),
                 root["roi"].at("height").get<double>()};
  }
  for (const auto& entry : root.at("slices")) {
    chain.cumulative.push_back(transform_from(entry.at("cumulative")));
    if (entry.at("index").get<std::size_t>() == 0) continue;
    std::vector<roi_register::LevelResult> levels;
    for (const auto& lj : entry.at("levels")) {
      roi_register::LevelResult lr;
      lr.level = lj.at("level").get<int>();
      lr.transform = {lj.at("theta").get<double>(), lj.at("dx").get<double>(),
                      lj.at("dy").get<double>()};
      lr.candidate_count = lj.at("candidates").get<int>();
      lr.chosen_ssd = lj.at("ssd").get<double>();
      lr.fallback = lj.at("fallback").get<bool>();
      levels.push_back(lr);
    }
    chain.pair_levels.push_back(std::move(levels));
  }
  return chain;
}

std::string report_to_json(const eval::EvalReport& report) {
  ordered_json pairs = ordered_json::array();
  for (const auto& p : report.pairs)
    pairs.push_back({{"i", p.i}, {"j", p.j}, {"similarity", p.similarity}});
  ordered_json fallback = ordered_json::array();
  for (const auto& [i, j] : report.fallback_pairs)
    fallback.push_back(ordered_json::array({i, j}));
  ordered_json root;
  root["pairs"] = std::move(pairs);
  root["mean"] = report.mean;
  root["std"] = report.stddev;
  root["fallback_pairs"] = std::move(fallback);
  return root.dump(2);
}

std::string global_to_json(const global_align::GlobalAlignResult& g) {
  ordered_json pairs = ordered_json::array();
  for (std::size_t i = 0; i < g.pairwise.size(); ++i) {
    ordered_json entry;
    entry["pair"] = ordered_json::array({i, i + 1});
    entry["theta"] = g.pairwise[i].theta;
    entry["dx"] = g.pairwise[i].dx;
    entry["dy"] = g.pairwise[i].dy;
    pairs.push_back(std::move(entry));
  }
  ordered_json cumulative = ordered_json::array();
  for (std::size_t i = 0; i < g.cumulative.size(); ++i) {
    ordered_json entry;
    entry["index"] = i;
    entry["theta"] = g.cumulative[i].theta;
    entry["dx"] = g.cumulative[i].dx;
    entry["dy"] = g.cumulative[i].dy;
    cumulative.push_back(std::move(entry));
  }
  ordered_json root;
  root["pairs"] = std::move(pairs);
  root["cumulative"] = std::move(cumulative);
  return root.dump(2);
}

RunResult run_pipeline(const std::filesystem::path& in_dir,
                       const std::optional<std::filesystem::path>& masks_dir,
                       const std::filesystem::path& out_dir,
                       const Config& cfg) {
  namespace fs = std::filesystem;
  const auto t_load = std::chrono::steady_clock::now();
  const std::vector<GrayImage> slices = io::load_gray_stack(in_dir);
  if (slices.empty()) throw IoError("no slices found in " + in_dir.string());

  std::vector<BinaryMask> masks;
  if (masks_dir) {
    masks = io::load_mask_stack(*masks_dir);
    if (masks.size() != slices.size())
      throw InvalidArgument("mask count does not match slice count");
  }

  fs::create_directories(out_dir);
  ordered_json timings;
  timings["load_ms"] = ms_since(t_load);

  if (cfg.threads > 0) set_threads(cfg.threads);

  RunResult r;
  auto t0 = std::chrono::steady_clock::now();
  r.cleaned = preprocess_stage(slices, cfg);
  timings["preprocess_ms"] = ms_since(t0);

  t0 = std::chrono::steady_clock::now();
  r.labels = segment_stage(r.cleaned, cfg);
  timings["segment_ms"] = ms_since(t0);

  t0 = std::chrono::steady_clock::now();
  r.global = global_stage(r.cleaned, r.labels, cfg);
  timings["global_ms"] = ms_since(t0);

  t0 = std::chrono::steady_clock::now();
  roi_register::RegistrationConfig rc;
  rc.levels = cfg.levels;
  rc.sift = cfg.sift;
  auto stack_result =
      roi_register::register_stack(r.global.registered, cfg.roi, rc);
  r.roi_chain = stack_result.chain;
  timings["register_ms"] = ms_since(t0);

  r.total_chain = r.roi_chain;
  for (std::size_t i = 0; i < slices.size(); ++i)
    r.total_chain.cumulative[i] =
        compose(r.roi_chain.cumulative[i], r.global.cumulative[i]);
  for (std::size_t i = 0; i < slices.size(); ++i)
    r.final_slices.push_back(
        warp_image(r.cleaned[i], r.total_chain.cumulative[i], Interp::bilinear));

  t0 = std::chrono::steady_clock::now();
  fs::create_directories(out_dir / "cleaned");
  fs::create_directories(out_dir / "ms");
  fs::create_directories(out_dir / "global");
  fs::create_directories(out_dir / "final");
  for (std::size_t i = 0; i < slices.size(); ++i) {
    io::save_png_gray(r.cleaned[i], out_dir / "cleaned" / slice_name(i));
    io::save_png_gray(ms::render_ms(r.labels[i]), out_dir / "ms" / slice_name(i));
    io::save_png_gray(r.global.registered[i], out_dir / "global" / slice_name(i));
    io::save_png_gray(r.final_slices[i], out_dir / "final" / slice_name(i));
  }
  {
    std::ofstream out(out_dir / "global.json");
    out << global_to_json(r.global) << "\n";
  }
  {
    std::ofstream out(out_dir / "chain.json");
    out << chain_to_json(r.total_chain) << "\n";
  }
  if (masks_dir) {
    r.report = eval::evaluate_chain(masks, r.total_chain, cfg.window);
    std::ofstream out(out_dir / "report.json");
    out << report_to_json(*r.report) << "\n";
  }
  timings["write_ms"] = ms_since(t0);

  ordered_json manifest;
  manifest["tool"] = "wsireg";
  manifest["version"] = "0.1.0";
  manifest["config"] = ordered_json::parse(config_to_json(cfg));
  manifest["slices"] = slices.size();
  manifest["timings"] = std::move(timings);
  std::ofstream mf(out_dir / "manifest.json");
  mf << manifest.dump(2) << "\n";
  return r;
}

}  // namespace wsireg::pipeline
