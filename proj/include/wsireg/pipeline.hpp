#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wsireg/eval.hpp"
#include "wsireg/global_align.hpp"
#include "wsireg/mumford_shah.hpp"
#include "wsireg/roi_register.hpp"
#include "wsireg/sift.hpp"

namespace wsireg::pipeline {

// Every stage constant in one place, file-loadable and flag-overridable.
struct Config {
  // preprocessing
  double blur_sigma = 10.0;
  int morph_radius = 20;
  // segmentation
  ms::MsConfig ms;
  // whole-tissue alignment
  global_align::GlobalAlignConfig global;
  // ROI cascade
  RoiBox roi;
  int levels = 3;
  sift::SiftConfig sift;
  // evaluation
  int window = 1;

  std::uint64_t seed = 1234;
  int threads = 0;
};

// key = value lines, '#' comments. Unknown keys are an error.
void apply_config_file(Config& cfg, const std::filesystem::path& path);
void apply_config_entry(Config& cfg, const std::string& key,
                        const std::string& value);

// Individually invokable stages (the CLI subcommands map onto these).
std::vector<GrayImage> preprocess_stage(const std::vector<GrayImage>& slices,
                                        const Config& cfg);
std::vector<ms::LabelImage> segment_stage(const std::vector<GrayImage>& cleaned,
                                          const Config& cfg);
global_align::GlobalAlignResult global_stage(
    const std::vector<GrayImage>& cleaned,
    const std::vector<ms::LabelImage>& labels, const Config& cfg);

struct RunResult {
  std::vector<GrayImage> cleaned;
  std::vector<ms::LabelImage> labels;
  global_align::GlobalAlignResult global;
  roi_register::RegistrationChain roi_chain;   // relative to the global frame
  roi_register::RegistrationChain total_chain; // raw slice -> final frame
  std::vector<GrayImage> final_slices;         // single warp from cleaned
  std::optional<eval::EvalReport> report;
};

// Full pipeline over in-memory grayscale slices; masks are optional and used
// only for the evaluation stage.
RunResult run_on_stack(const std::vector<GrayImage>& slices,
                       const std::vector<BinaryMask>* masks, const Config& cfg);

// File-based pipeline: reads numbered slices from in_dir, persists every
// stage under out_dir (cleaned/, ms/, global/, final/, global.json,
// chain.json, report.json, manifest.json).
RunResult run_pipeline(const std::filesystem::path& in_dir,
                       const std::optional<std::filesystem::path>& masks_dir,
                       const std::filesystem::path& out_dir, const Config& cfg);

// Report serialization, shared by the CLI and the pipeline writer.
std::string chain_to_json(const roi_register::RegistrationChain& chain);
roi_register::RegistrationChain chain_from_json_file(
    const std::filesystem::path& path);
std::string report_to_json(const eval::EvalReport& report);
std::string global_to_json(const global_align::GlobalAlignResult& g);
std::string config_to_json(const Config& cfg);

}  // namespace wsireg::pipeline
