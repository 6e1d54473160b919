#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "wsireg/error.hpp"
#include "wsireg/io.hpp"
#include "wsireg/kernels.hpp"
#include "wsireg/parallel.hpp"
#include "wsireg/phantom.hpp"
#include "wsireg/pipeline.hpp"
#include "wsireg/preprocess.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using namespace wsireg;

namespace {

struct RoiOption {
  std::string text;

  RoiBox parse() const {
    RoiBox roi;
    if (std::sscanf(text.c_str(), "%lf,%lf,%lf,%lf", &roi.cx, &roi.cy,
                    &roi.width, &roi.height) != 4)
      throw InvalidArgument("--roi expects cx,cy,w,h");
    return roi;
  }
};

std::string slice_name(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04zu.png", i);
  return buf;
}

void add_config_flags(CLI::App* app, pipeline::Config& cfg,
                      std::string& config_path) {
  app->add_option("--config", config_path, "key = value config file");
  app->add_option("--threads", cfg.threads, "worker thread bound (0 = auto)");
  app->add_option("--seed", cfg.seed, "RNG seed");
}

void finish_config(pipeline::Config& cfg, const std::string& config_path) {
  if (!config_path.empty()) pipeline::apply_config_file(cfg, config_path);
  if (cfg.threads > 0) set_threads(cfg.threads);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regional multi-resolution registration for whole-slide image stacks"};
  app.require_subcommand(1);

  // --- preprocess ---
  auto* cmd_pre = app.add_subcommand("preprocess", "Clean extra stains/artifacts around the tissue");
  std::string pre_in, pre_out, pre_cfg_path;
  pipeline::Config pre_cfg;
  cmd_pre->add_option("--in", pre_in, "input slice directory")->required();
  cmd_pre->add_option("--out", pre_out, "output directory")->required();
  cmd_pre->add_option("--sigma", pre_cfg.blur_sigma, "Gaussian sigma (px)");
  cmd_pre->add_option("--morph-radius", pre_cfg.morph_radius, "disk radius (px)");
  add_config_flags(cmd_pre, pre_cfg, pre_cfg_path);

  // --- segment ---
  auto* cmd_seg = app.add_subcommand("segment", "Piecewise-constant segmentation of cleaned slides");
  std::string seg_in, seg_out, seg_cfg_path;
  pipeline::Config seg_cfg;
  cmd_seg->add_option("--in", seg_in)->required();
  cmd_seg->add_option("--out", seg_out)->required();
  cmd_seg->add_option("--phases", seg_cfg.ms.phases);
  cmd_seg->add_option("--lambda", seg_cfg.ms.lambda);
  cmd_seg->add_option("--sweeps", seg_cfg.ms.sweeps);
  add_config_flags(cmd_seg, seg_cfg, seg_cfg_path);

  // --- align-global ---
  auto* cmd_glob = app.add_subcommand("align-global", "Whole-tissue rigid alignment of consecutive slides");
  std::string glob_in, glob_ms, glob_out, glob_cfg_path;
  pipeline::Config glob_cfg;
  cmd_glob->add_option("--in", glob_in, "cleaned slice directory")->required();
  cmd_glob->add_option("--ms", glob_ms, "segmentation label directory (optional; recomputed when absent)");
  cmd_glob->add_option("--out", glob_out)->required();
  cmd_glob->add_option("--theta-max", glob_cfg.global.theta_max_deg, "degrees");
  cmd_glob->add_option("--theta-step", glob_cfg.global.theta_step_deg, "degrees");
  cmd_glob->add_option("--trans-frac", glob_cfg.global.trans_frac);
  cmd_glob->add_option("--refine-factor", glob_cfg.global.refine_factor);
  cmd_glob->add_option("--est-level", glob_cfg.global.est_level);
  add_config_flags(cmd_glob, glob_cfg, glob_cfg_path);

  // --- register ---
  auto* cmd_reg = app.add_subcommand("register", "Multi-resolution ROI registration cascade");
  std::string reg_in, reg_out, reg_report, reg_cfg_path;
  RoiOption reg_roi;
  pipeline::Config reg_cfg;
  cmd_reg->add_option("--in", reg_in, "globally aligned slice directory")->required();
  cmd_reg->add_option("--roi", reg_roi.text, "cx,cy,w,h at full resolution")->required();
  cmd_reg->add_option("--levels", reg_cfg.levels, "coarsest pyramid level");
  cmd_reg->add_option("--out", reg_out)->required();
  cmd_reg->add_option("--report", reg_report, "chain JSON path");
  cmd_reg->add_option("--sift-layers", reg_cfg.sift.layers_per_octave);
  cmd_reg->add_option("--beta", reg_cfg.sift.beta);
  add_config_flags(cmd_reg, reg_cfg, reg_cfg_path);

  // --- evaluate ---
  auto* cmd_eval = app.add_subcommand("evaluate", "Score lumen mask overlap under a registration chain");
  std::string eval_masks, eval_chain, eval_out;
  int eval_window = 1;
  cmd_eval->add_option("--masks", eval_masks)->required();
  cmd_eval->add_option("--chain", eval_chain)->required();
  cmd_eval->add_option("--out", eval_out)->required();
  cmd_eval->add_option("--window", eval_window, "score pairs up to this slice distance");

  // --- phantom ---
  auto* cmd_ph = app.add_subcommand("phantom", "Generate a synthetic stack with ground truth");
  std::string ph_spec, ph_out;
  cmd_ph->add_option("--spec", ph_spec, "PhantomSpec JSON (defaults when omitted)");
  cmd_ph->add_option("--out", ph_out)->required();

  // --- run ---
  auto* cmd_run = app.add_subcommand("run", "Full pipeline: preprocess, segment, align, register, evaluate");
  std::string run_in, run_masks, run_out, run_cfg_path;
  RoiOption run_roi;
  pipeline::Config run_cfg;
  cmd_run->add_option("--in", run_in)->required();
  cmd_run->add_option("--roi", run_roi.text, "cx,cy,w,h at full resolution")->required();
  cmd_run->add_option("--masks", run_masks, "lumen mask directory (enables evaluation)");
  cmd_run->add_option("--out", run_out)->required();
  cmd_run->add_option("--levels", run_cfg.levels);
  cmd_run->add_option("--window", run_cfg.window);
  add_config_flags(cmd_run, run_cfg, run_cfg_path);

  // --- sift-inspect ---
  auto* cmd_sift = app.add_subcommand("sift-inspect", "Dump keypoints (and matches for a pair) to JSON");
  std::string si_img, si_img2, si_out;
  RoiOption si_roi;
  pipeline::Config si_cfg;
  cmd_sift->add_option("--img", si_img)->required();
  cmd_sift->add_option("--img2", si_img2, "second image for matching");
  cmd_sift->add_option("--roi", si_roi.text)->required();
  cmd_sift->add_option("--out", si_out)->required();
  cmd_sift->add_option("--sift-layers", si_cfg.sift.layers_per_octave);
  cmd_sift->add_option("--beta", si_cfg.sift.beta);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_pre) {
      finish_config(pre_cfg, pre_cfg_path);
      const auto paths = io::list_slices(pre_in);
      if (paths.empty()) throw IoError("no slices found in " + pre_in);
      fs::create_directories(pre_out);
      for (const auto& p : paths) {
        const GrayImage cleaned = preprocess::clean_tissue(
            io::load_gray(p), {pre_cfg.blur_sigma, pre_cfg.morph_radius, 0.25});
        io::save_png_gray(cleaned,
                          fs::path(pre_out) / p.filename().replace_extension(".png"));
      }
    } else if (*cmd_seg) {
      finish_config(seg_cfg, seg_cfg_path);
      const auto stack = io::load_gray_stack(seg_in);
      if (stack.empty()) throw IoError("no slices found in " + seg_in);
      const auto labels = pipeline::segment_stage(stack, seg_cfg);
      fs::create_directories(fs::path(seg_out) / "rendered");
      fs::create_directories(fs::path(seg_out) / "labels");
      for (std::size_t i = 0; i < labels.size(); ++i) {
        io::save_png_gray(ms::render_ms(labels[i]),
                          fs::path(seg_out) / "rendered" / slice_name(i));
        GrayImage raw(labels[i].width, labels[i].height);
        for (std::size_t k = 0; k < labels[i].labels.size(); ++k)
          raw.data()[k] = static_cast<float>(labels[i].labels[k]);
        io::save_png_gray(raw, fs::path(seg_out) / "labels" / slice_name(i));
      }
    } else if (*cmd_glob) {
      finish_config(glob_cfg, glob_cfg_path);
      const auto cleaned = io::load_gray_stack(glob_in);
      if (cleaned.empty()) throw IoError("no slices found in " + glob_in);
      const auto labels = pipeline::segment_stage(cleaned, glob_cfg);
      const auto result = pipeline::global_stage(cleaned, labels, glob_cfg);
      fs::create_directories(glob_out);
      for (std::size_t i = 0; i < result.registered.size(); ++i)
        io::save_png_gray(result.registered[i],
                          fs::path(glob_out) / slice_name(i));
      std::ofstream out(fs::path(glob_out) / "global.json");
      out << pipeline::global_to_json(result) << "\n";
    } else if (*cmd_reg) {
      finish_config(reg_cfg, reg_cfg_path);
      reg_cfg.roi = reg_roi.parse();
      const auto stack = io::load_gray_stack(reg_in);
      if (stack.size() < 2) throw IoError("need at least 2 slices in " + reg_in);
      roi_register::RegistrationConfig rc;
      rc.levels = reg_cfg.levels;
      rc.sift = reg_cfg.sift;
      const auto result = roi_register::register_stack(stack, reg_cfg.roi, rc);
      fs::create_directories(reg_out);
      for (std::size_t i = 0; i < result.registered.size(); ++i)
        io::save_png_gray(result.registered[i], fs::path(reg_out) / slice_name(i));
      const std::string report_path =
          reg_report.empty() ? (fs::path(reg_out) / "chain.json").string()
                             : reg_report;
      std::ofstream out(report_path);
      out << pipeline::chain_to_json(result.chain) << "\n";
    } else if (*cmd_eval) {
      const auto masks = io::load_mask_stack(eval_masks);
      const auto chain = pipeline::chain_from_json_file(eval_chain);
      const auto report = eval::evaluate_chain(masks, chain, eval_window);
      std::ofstream out(eval_out);
      out << pipeline::report_to_json(report) << "\n";
      std::cout << "mean " << report.mean << " std " << report.stddev << "\n";
    } else if (*cmd_ph) {
      phantom::PhantomSpec spec;
      if (!ph_spec.empty()) {
        std::ifstream in(ph_spec);
        if (!in) throw IoError("cannot open spec " + ph_spec);
        ordered_json j;
        in >> j;
        if (j.contains("slices")) spec.slices = j["slices"];
        if (j.contains("dims")) spec.dims = j["dims"];
        if (j.contains("vessel_cx")) spec.vessel_cx = j["vessel_cx"];
        if (j.contains("vessel_cy")) spec.vessel_cy = j["vessel_cy"];
        if (j.contains("vessel_rx")) spec.vessel_rx = j["vessel_rx"];
        if (j.contains("vessel_ry")) spec.vessel_ry = j["vessel_ry"];
        if (j.contains("vessel_drift_x")) spec.vessel_drift_x = j["vessel_drift_x"];
        if (j.contains("vessel_drift_y")) spec.vessel_drift_y = j["vessel_drift_y"];
        if (j.contains("vessel_intensity")) spec.vessel_intensity = j["vessel_intensity"];
        if (j.contains("texture_amplitude")) spec.texture_amplitude = j["texture_amplitude"];
        if (j.contains("texture_corr")) spec.texture_corr = j["texture_corr"];
        if (j.contains("distractors")) spec.distractors = j["distractors"];
        if (j.contains("distractor_radius")) spec.distractor_radius = j["distractor_radius"];
        if (j.contains("theta_max_deg")) spec.theta_max_deg = j["theta_max_deg"];
        if (j.contains("shift_max")) spec.shift_max = j["shift_max"];
        if (j.contains("artifact_stains")) spec.artifact_stains = j["artifact_stains"];
        if (j.contains("stain_variation")) spec.stain_variation = j["stain_variation"];
        if (j.contains("seed")) spec.seed = j["seed"];
      }
      const auto stack = phantom::generate(spec);
      fs::create_directories(fs::path(ph_out) / "slices");
      fs::create_directories(fs::path(ph_out) / "masks");
      for (std::size_t i = 0; i < stack.slices.size(); ++i) {
        io::save_png_rgb(stack.slices[i], fs::path(ph_out) / "slices" / slice_name(i));
        io::save_mask(stack.lumen_masks[i], fs::path(ph_out) / "masks" / slice_name(i));
      }
      ordered_json truth = ordered_json::array();
      for (std::size_t i = 0; i < stack.truth.size(); ++i)
        truth.push_back({{"index", i},
                         {"theta", stack.truth[i].theta},
                         {"dx", stack.truth[i].dx},
                         {"dy", stack.truth[i].dy}});
      const RoiBox roi = phantom::default_roi(spec);
      ordered_json root;
      root["truth"] = std::move(truth);
      root["suggested_roi"] = {{"cx", roi.cx},
                               {"cy", roi.cy},
                               {"width", roi.width},
                               {"height", roi.height}};
      std::ofstream out(fs::path(ph_out) / "truth.json");
      out << root.dump(2) << "\n";
      std::cout << "suggested --roi " << roi.cx << "," << roi.cy << ","
                << roi.width << "," << roi.height << "\n";
    } else if (*cmd_run) {
      finish_config(run_cfg, run_cfg_path);
      run_cfg.roi = run_roi.parse();
      std::optional<fs::path> masks;
      if (!run_masks.empty()) masks = run_masks;
      const auto result = pipeline::run_pipeline(run_in, masks, run_out, run_cfg);
      if (result.report)
        std::cout << "similarity mean " << result.report->mean << " std "
                  << result.report->stddev << "\n";
      std::cout << "kernels backend: "
                << kernels::name(kernels::active()) << "\n";
    } else if (*cmd_sift) {
      const GrayImage img = io::load_gray(si_img);
      const RoiBox roi = si_roi.parse();
      const auto feats = sift::detect_and_describe(img, roi, si_cfg.sift);
      ordered_json root;
      const auto dump_feats = [](const std::vector<sift::Feature>& fs_) {
        ordered_json arr = ordered_json::array();
        for (const auto& [kp, desc] : fs_) {
          arr.push_back({{"x", kp.x},
                         {"y", kp.y},
                         {"scale", kp.scale},
                         {"orientation", kp.orientation},
                         {"response", kp.response},
                         {"sx", desc.sx()},
                         {"sy", desc.sy()}});
        }
        return arr;
      };
      root["keypoints"] = dump_feats(feats);
      if (!si_img2.empty()) {
        const GrayImage img2 = io::load_gray(si_img2);
        const auto feats2 = sift::detect_and_describe(img2, roi, si_cfg.sift);
        root["keypoints2"] = dump_feats(feats2);
        ordered_json matches = ordered_json::array();
        for (const auto& m : sift::match_features(feats, feats2))
          matches.push_back({{"index_a", m.index_a},
                             {"index_b", m.index_b},
                             {"distance", m.distance}});
        root["matches"] = std::move(matches);
      }
      std::ofstream out(si_out);
      out << root.dump(2) << "\n";
    }
  } catch (const InvalidSpecError& e) {
    std::cerr << "invalid spec: " << e.what() << "\n";
    return 5;
  } catch (const BlankSlideError& e) {
    std::cerr << "blank slide: " << e.what() << "\n";
    return 4;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
