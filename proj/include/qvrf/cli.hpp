// Copyright 2026 The qvrf Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QVRF_CLI_HPP_
#define QVRF_CLI_HPP_

// Command-line front end. cli_dispatch takes argv without the program name
// so tests can drive it in-process.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qvrf/bd_rate.hpp"
#include "qvrf/codec.hpp"
#include "qvrf/error.hpp"
#include "qvrf/image.hpp"
#include "qvrf/metrics.hpp"
#include "qvrf/rate_control.hpp"
#include "qvrf/sweep.hpp"

namespace qvrf {

namespace detail {

inline std::vector<NamedImage> load_image_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto ext = entry.path().extension().string();
    if (entry.is_regular_file() && (ext == ".pgm" || ext == ".ppm")) paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw IoError("no .pgm/.ppm images in " + dir.string());
  std::vector<NamedImage> images;
  for (const auto& p : paths) images.push_back({p.filename().string(), read_pnm(p)});
  return images;
}

inline FitConfig load_fit(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_fit_config(in);
}

inline std::vector<RdRow> load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_rd_csv(in);
}

}  // namespace detail

inline int cli_dispatch(const std::vector<std::string>& args, std::ostream& out,
                        std::ostream& err) {
  CLI::App app{"qvrf: variable-rate DCT image codec driven by a single quantization regulator"};
  app.require_subcommand(1);

  auto* encode = app.add_subcommand("encode", "Encode a PGM/PPM image");
  std::string enc_in, enc_out, enc_fit;
  std::optional<double> enc_a, enc_lambda;
  encode->add_option("-i,--input", enc_in, "Input PGM/PPM")->required()->check(CLI::ExistingFile);
  encode->add_option("-o,--output", enc_out, "Output .qvrf")->required();
  auto* opt_a = encode->add_option("--a", enc_a, "Quantization regulator");
  auto* opt_lambda = encode->add_option("--lambda", enc_lambda, "Lagrange multiplier");
  auto* opt_fit = encode->add_option("--fit", enc_fit, "Fit config from `qvrf fit`");
  opt_a->excludes(opt_lambda);
  opt_lambda->needs(opt_fit);
  opt_fit->needs(opt_lambda);

  auto* decode = app.add_subcommand("decode", "Decode a .qvrf stream to PGM");
  std::string dec_in, dec_out;
  decode->add_option("-i,--input", dec_in)->required()->check(CLI::ExistingFile);
  decode->add_option("-o,--output", dec_out)->required();

  auto* sweep = app.add_subcommand("sweep", "RD sweep over log-spaced regulator values");
  std::string sw_dir, sw_csv, sw_fit;
  double sw_min = 1.0, sw_max = 10.0;
  int sw_points = 8;
  sweep->add_option("--images", sw_dir, "Directory of PGM/PPM images")->required();
  sweep->add_option("--a-min", sw_min, "Smallest regulator")->capture_default_str();
  sweep->add_option("--a-max", sw_max, "Largest regulator")->capture_default_str();
  sweep->add_option("--points", sw_points, "Number of regulator values")->capture_default_str();
  sweep->add_option("--csv", sw_csv, "Output CSV")->required();
  sweep->add_option("--fit", sw_fit, "Fit config; fills the lambda column");

  auto* fit = app.add_subcommand("fit", "Optimize regulators for a lambda set and fit the sqrt(lambda) line");
  std::vector<double> fit_lambdas = kDefaultLambdas;
  std::string fit_dir, fit_out, fit_mode = "actual";
  fit->add_option("--lambdas", fit_lambdas, "Lagrange multipliers, ascending");
  fit->add_option("--images", fit_dir, "Calibration image directory")->required();
  fit->add_option("--out", fit_out, "Output fit config")->required();
  fit->add_option("--cost-mode", fit_mode, "Rate term: actual or estimate")
      ->check(CLI::IsMember({"actual", "estimate"}))
      ->capture_default_str();

  auto* bdrate = app.add_subcommand("bdrate", "BD-rate of a test RD CSV against an anchor");
  std::string bd_anchor, bd_test;
  bdrate->add_option("--anchor", bd_anchor)->required()->check(CLI::ExistingFile);
  bdrate->add_option("--test", bd_test)->required()->check(CLI::ExistingFile);

  auto* account = app.add_subcommand("account", "Per-segment bit accounting of .qvrf streams");
  std::vector<std::string> acc_in;
  account->add_option("-i,--input", acc_in)->required()->check(CLI::ExistingFile);

  auto* compare = app.add_subcommand("psnr", "PSNR and MS-SSIM between two images");
  std::string cmp_ref, cmp_test;
  compare->add_option("--ref", cmp_ref)->required()->check(CLI::ExistingFile);
  compare->add_option("--test", cmp_test)->required()->check(CLI::ExistingFile);

  std::vector<const char*> argv;
  argv.push_back("qvrf");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(int(argv.size()), argv.data());
    if (encode->parsed() && !enc_a && !enc_lambda) {
      throw CLI::RequiredError("encode needs --a or --lambda with --fit");
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    out << std::setprecision(10);
    if (encode->parsed()) {
      double a = 0.0;
      if (enc_a) {
        a = *enc_a;
      } else {
        a = lambda_to_regulator(*enc_lambda, detail::load_fit(enc_fit).fit);
      }
      const Bitstream bs = encode_image(read_pnm(enc_in), Regulator(a));
      write_file(enc_out, bs.serialize());
      const BitBreakdown b = account_bits(bs);
      out << "a=" << bs.header.a() << " bytes=" << bs.size_bytes() << " bpp=" << b.total_bpp
          << '\n';
    } else if (decode->parsed()) {
      const auto bytes = read_file(dec_in);
      write_pgm(dec_out, decode_image(bytes));
    } else if (sweep->parsed()) {
      std::optional<LinearFit> line;
      if (!sw_fit.empty()) line = detail::load_fit(sw_fit).fit;
      auto rows = rd_sweep(detail::load_image_dir(sw_dir), log_spaced(sw_min, sw_max, sw_points));
      if (line) {
        for (auto& r : rows) {
          const double root = line->slope * r.a + line->intercept;
          r.lambda = line->lambda_ref * root * root;
        }
      }
      std::ofstream csv(sw_csv);
      if (!csv) throw IoError("cannot create " + sw_csv);
      write_rd_csv(csv, rows);
    } else if (fit->parsed()) {
      const LambdaSet lambdas(fit_lambdas);
      std::vector<Image> images;
      for (auto& ni : detail::load_image_dir(fit_dir)) images.push_back(std::move(ni.image));
      const CalibrationSet calib(images);
      SearchOptions opt;
      opt.mode = fit_mode == "estimate" ? CostMode::kEstimate : CostMode::kActual;
      const VectorOptimization vo = optimize_vector(lambdas, calib, opt);
      const LinearFit line = fit_sqrt_lambda_line(vo.regulators, lambdas);
      std::ofstream cfg(fit_out);
      if (!cfg) throw IoError("cannot create " + fit_out);
      write_fit_config(cfg, lambdas, vo.regulators, line);
      if (!vo.strictly_increasing) {
        err << "qvrf: warning: optimized regulators are not strictly increasing in lambda\n";
      }
      for (std::size_t j = 0; j < lambdas.size(); ++j) {
        if (vo.searches[j].fell_back_to_grid) {
          err << "qvrf: warning: non-unimodal cost at lambda=" << lambdas[j]
              << ", used grid minimum\n";
        }
      }
      out << "slope=" << line.slope << " intercept=" << line.intercept
          << " r2=" << line.r_squared << '\n';
    } else if (bdrate->parsed()) {
      const double pct = bd_rate(curve_from_rows(detail::load_csv(bd_anchor)),
                                 curve_from_rows(detail::load_csv(bd_test)));
      out << "bd_rate_percent=" << pct << '\n';
    } else if (account->parsed()) {
      out << "file,total_bpp,latent_bpp,side_bpp,header_bpp\n";
      for (const auto& path : acc_in) {
        const Bitstream bs = Bitstream::parse(read_file(path));
        const BitBreakdown b = account_bits(bs);
        out << path << ',' << b.total_bpp << ',' << b.latent_bpp << ',' << b.side_bpp << ','
            << b.header_bpp << '\n';
      }
    } else if (compare->parsed()) {
      const Image ref = read_pnm(cmp_ref);
      const Image test = read_pnm(cmp_test);
      out << "psnr_db=" << psnr(ref, test);
      if (std::min(ref.width, ref.height) >= kMsSsimMinDimension) {
        out << " ms_ssim=" << ms_ssim(ref, test);
      }
      out << '\n';
    }
  } catch (const std::exception& e) {
    err << "qvrf: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace qvrf

#endif  // QVRF_CLI_HPP_
