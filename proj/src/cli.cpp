#include "circradon/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "circradon/dataset.hpp"
#include "circradon/metrics.hpp"
#include "circradon/phantom.hpp"
#include "circradon/radon.hpp"
#include "circradon/spectral.hpp"
#include "circradon/tensor_io.hpp"
#include "circradon/tsvd.hpp"

namespace circradon {

namespace {

using nlohmann::json;

struct PhantomOptions {
  std::uint64_t seed = 0;
  bool base = false;
  bool no_augment = false;
  std::string in_phantom;
};

EllipsePhantom make_phantom(const PhantomOptions& o) {
  if (!o.in_phantom.empty()) {
    std::ifstream is(o.in_phantom);
    if (!is) throw std::runtime_error("cannot open phantom record " + o.in_phantom);
    return read_phantom(is);
  }
  EllipsePhantom p = shepp_logan_base();
  if (o.base) return p;
  Rng prng(combine_seed(o.seed, 1));
  p = perturb(p, prng);
  if (o.no_augment) return p;
  Rng arng(combine_seed(o.seed, 2));
  return augment(p, arng);
}

fs::path sidecar_path(const fs::path& tensor) {
  fs::path p = tensor;
  p += ".json";
  return p;
}

void write_preview(const fs::path& path, std::uint32_t rows, std::uint32_t cols,
                   std::span<const double> values) {
  const std::string ext = path.extension().string();
  if (ext == ".png") {
    write_png(path, rows, cols, values);
  } else if (ext == ".pgm") {
    write_pgm(path, rows, cols, values);
  } else {
    throw std::invalid_argument("preview extension must be .pgm or .png: " + path.string());
  }
}

SplitCounts parse_counts(const std::vector<std::string>& items, SplitCounts counts) {
  for (const std::string& group : items) {
    std::stringstream ss(group);
    for (std::string item; std::getline(ss, item, ',');) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("--counts expects split=N, got " + item);
      const std::string key = item.substr(0, eq);
      const int value = std::stoi(item.substr(eq + 1));
      if (value < 0) throw std::invalid_argument("--counts: negative count");
      if (key == "train") counts.train = value;
      else if (key == "validation") counts.validation = value;
      else if (key == "test") counts.test = value;
      else throw std::invalid_argument("--counts: unknown split " + key);
    }
  }
  return counts;
}

// Truth file matching a reconstruction file name.
std::optional<fs::path> match_truth(const fs::path& truth_dir, const std::string& name) {
  std::vector<std::string> candidates = {name};
  for (const std::string suffix : {"_recon.f32", "_y.f32"}) {
    if (name.size() > suffix.size() && name.ends_with(suffix)) {
      candidates.push_back(name.substr(0, name.size() - suffix.size()) + "_x.f32");
    }
  }
  for (const auto& c : candidates) {
    if (fs::exists(truth_dir / c)) return truth_dir / c;
  }
  return std::nullopt;
}

// The subcommand being parsed, if any, so help shows its own options.
const CLI::App& help_target(const CLI::App& app) {
  const auto subs = app.get_subcommands();
  return subs.empty() ? app : *subs.front();
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Circular Radon transform toolkit: phantoms, forward model, TSVD inversion, datasets, metrics"};
  app.name("circradon");
  app.require_subcommand(1);

  // phantom
  PhantomOptions ph;
  std::string ph_out, ph_image, ph_preview;
  int ph_side = kImageSide;
  auto* phantom_cmd = app.add_subcommand("phantom", "Emit a perturbed/augmented Shepp-Logan phantom and its raster");
  phantom_cmd->add_option("--seed", ph.seed, "Random seed")->required();
  phantom_cmd->add_flag("--base", ph.base, "Unperturbed Shepp-Logan table");
  phantom_cmd->add_flag("--no-augment", ph.no_augment, "Skip rotation/translation");
  phantom_cmd->add_option("--out", ph_out, "Phantom text record");
  phantom_cmd->add_option("--image", ph_image, "Raster tensor (.f32)");
  phantom_cmd->add_option("--preview", ph_preview, "Raster preview (.pgm/.png)");
  phantom_cmd->add_option("--side", ph_side, "Raster side")->check(CLI::Range(2, 4096));

  // forward
  PhantomOptions fw;
  std::string fw_view = "full", fw_out;
  double fw_noise = 0.0;
  auto* forward_cmd = app.add_subcommand("forward", "Phantom -> sinogram");
  forward_cmd->add_option("--phantom", fw.in_phantom, "Phantom text record (otherwise generated from --seed)");
  forward_cmd->add_option("--seed", fw.seed, "Seed for the phantom (when generated) and the noise")->required();
  forward_cmd->add_flag("--base", fw.base, "Unperturbed Shepp-Logan table");
  forward_cmd->add_flag("--no-augment", fw.no_augment, "Skip rotation/translation");
  forward_cmd->add_option("--view", fw_view, "full|limited")->check(CLI::IsMember({"full", "limited"}));
  forward_cmd->add_option("--noise", fw_noise, "Noise level in percent")->check(CLI::NonNegativeNumber);
  forward_cmd->add_option("--out", fw_out, "Sinogram tensor (.f32)")->required();

  // tsvd
  std::string ts_in, ts_out, ts_view, ts_rank = "half", ts_preview, ts_dataset, ts_out_dir, ts_dump;
  int ts_dump_mode = 0;
  auto* tsvd_cmd = app.add_subcommand("tsvd", "Sinogram -> TSVD reconstruction");
  tsvd_cmd->add_option("--in", ts_in, "Sinogram tensor");
  tsvd_cmd->add_option("--out", ts_out, "Reconstruction tensor (.f32)");
  tsvd_cmd->add_option("--dataset", ts_dataset, "Reconstruct every sample of a dataset directory");
  tsvd_cmd->add_option("--out-dir", ts_out_dir, "Output directory for --dataset");
  tsvd_cmd->add_option("--view", ts_view, "full|limited (default: sidecar, else 128 -> full, 64 -> limited)")
      ->check(CLI::IsMember({"full", "limited"}));
  tsvd_cmd->add_option("--rank", ts_rank, "half or a positive integer");
  tsvd_cmd->add_option("--preview", ts_preview, "Reconstruction preview (.pgm/.png)");
  tsvd_cmd->add_option("--dump-matrix", ts_dump, "Write the Volterra matrix of --dump-mode as float64");
  tsvd_cmd->add_option("--dump-mode", ts_dump_mode, "Mode index for --dump-matrix");

  // dataset
  std::string ds_name, ds_out;
  std::vector<std::string> ds_counts;
  bool ds_full = false;
  std::uint64_t ds_seed = kDefaultMasterSeed;
  int ds_workers = 1;
  auto* dataset_cmd = app.add_subcommand("dataset", "Generate a dataset from its name");
  dataset_cmd->add_option("--name", ds_name, "e.g. Train128cn15, Test64n5")->required();
  dataset_cmd->add_option("--out", ds_out, std::string("Output directory (default $") + kDataRootEnv + "/<name>)");
  dataset_cmd->add_option("--counts", ds_counts, "Overrides, e.g. train=200,validation=50 or test=10");
  dataset_cmd->add_flag("--full-scale", ds_full, "Use the full 2000/500/500 counts");
  dataset_cmd->add_option("--seed", ds_seed, "Master seed");
  dataset_cmd->add_option("--workers", ds_workers, "Worker threads")->check(CLI::PositiveNumber);

  // metrics
  std::string mt_recon, mt_truth, mt_name = "report", mt_out;
  auto* metrics_cmd = app.add_subcommand("metrics", "PSNR/SSIM of reconstructions against truths");
  metrics_cmd->add_option("--recon", mt_recon, "Reconstruction file or directory")->required();
  metrics_cmd->add_option("--truth", mt_truth, "Truth file or directory")->required();
  metrics_cmd->add_option("--name", mt_name, "Report name");
  metrics_cmd->add_option("--out", mt_out, "Write the report table to this file");

  // export
  std::string ex_in, ex_out;
  auto* export_cmd = app.add_subcommand("export", "Tensor -> 8-bit PGM/PNG preview");
  export_cmd->add_option("--in", ex_in, "Tensor (.f32)")->required();
  export_cmd->add_option("--out", ex_out, "Preview (.pgm/.png)")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << help_target(app).help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << help_target(app).help();
    return 2;
  }

  try {
    if (*phantom_cmd) {
      const EllipsePhantom p = make_phantom(ph);
      if (!ph_out.empty()) {
        std::ofstream os(ph_out);
        write_phantom(os, p);
      } else {
        write_phantom(out, p);
      }
      const ImageGrid img = rasterize(p, ph_side);
      if (!ph_image.empty()) write_image(ph_image, img);
      if (!ph_preview.empty()) write_preview(ph_preview, img.side, img.side, img.values);
      return 0;
    }

    if (*forward_cmd) {
      const EllipsePhantom p = make_phantom(fw);
      const View view = parse_view(fw_view);
      const MeasurementGrid grid = view == View::Full ? MeasurementGrid::full() : MeasurementGrid::limited();
      Sinogram s = forward_transform(p, grid);
      if (fw_noise > 0.0) {
        Rng nrng(combine_seed(fw.seed, 3));
        s = add_noise(s, fw_noise, nrng);
      }
      write_sinogram(fw_out, s);
      const json side = {{"view", to_string(view)},      {"n_rho", grid.n_rho},
                         {"n_phi", grid.n_phi},          {"rho_max", grid.rho_max},
                         {"phi_span", grid.phi_span},    {"radius", grid.radius},
                         {"seed", fw.seed},              {"noise_level_percent", fw_noise}};
      std::ofstream(sidecar_path(fw_out)) << side.dump(2) << '\n';
      out << "wrote " << fw_out << " (" << grid.n_rho << "x" << grid.n_phi << ", " << to_string(view)
          << " view, noise " << fw_noise << "%)\n";
      return 0;
    }

    if (*tsvd_cmd) {
      const TsvdConfig cfg = parse_rank(ts_rank);
      auto view_for = [&](const fs::path& sino, std::uint32_t rows) {
        if (!ts_view.empty()) return parse_view(ts_view);
        if (fs::exists(sidecar_path(sino))) {
          std::ifstream is(sidecar_path(sino));
          return parse_view(json::parse(is).at("view").get<std::string>());
        }
        return rows == 64 ? View::Limited : View::Full;
      };

      if (!ts_dataset.empty()) {
        if (ts_out_dir.empty()) throw std::invalid_argument("--dataset needs --out-dir");
        const DatasetManifest m = read_manifest(fs::path(ts_dataset) / kManifestFile);
        fs::create_directories(ts_out_dir);
        const TsvdReconstructor rec(m.grid(), cfg);
        for (const SampleRecord& r : m.samples) {
          const Sinogram s = read_sample(ts_dataset, r.id).y;
          write_image(fs::path(ts_out_dir) / (r.id + "_recon.f32"), rec.reconstruct(s).image);
        }
        out << "reconstructed " << m.samples.size() << " samples into " << ts_out_dir << '\n';
        return 0;
      }

      if (ts_in.empty() || (ts_out.empty() && ts_dump.empty())) {
        throw std::invalid_argument("tsvd needs --in with --out or --dump-matrix (or --dataset)");
      }
      const Tensor t = read_tensor(ts_in);
      const Sinogram s = read_sinogram(ts_in, view_for(ts_in, t.rows));
      const TsvdReconstructor rec(s.grid, cfg);
      if (!ts_dump.empty()) {
        std::ofstream os(ts_dump, std::ios::binary);
        write_matrix_dump(os, rec.matrix(std::abs(ts_dump_mode)));
        if (!os) throw std::runtime_error("cannot write " + ts_dump);
        out << "wrote mode " << std::abs(ts_dump_mode) << " matrix to " << ts_dump << '\n';
        if (ts_out.empty()) return 0;
      }
      const Reconstruction r = rec.reconstruct(s);
      write_image(ts_out, r.image);
      if (!ts_preview.empty()) write_preview(ts_preview, r.image.side, r.image.side, r.image.values);
      for (int n : r.skipped_modes) err << "warning: skipped mode " << n << " (SVD failure)\n";
      out << "wrote " << ts_out << " (rank " << rec.rank() << ", modes |n| <= " << rec.max_mode() << ")\n";
      return 0;
    }

    if (*dataset_cmd) {
      const Phase phase = parse_dataset_name(ds_name).phase;
      SplitCounts counts = ds_full ? full_scale_counts(phase) : desk_scale_counts(phase);
      counts = parse_counts(ds_counts, counts);
      if (phase == Phase::Test) counts.train = counts.validation = 0;
      else counts.test = 0;
      fs::path dir = ds_out;
      if (dir.empty()) {
        const char* root = std::getenv(kDataRootEnv);
        dir = fs::path(root ? root : "data") / ds_name;
      }
      DatasetManifest m = make_manifest(ds_name, counts, ds_seed);
      generate_dataset(m, dir, ds_workers);
      out << "wrote " << m.samples.size() << " samples of " << ds_name << " to " << dir.string() << '\n';
      return 0;
    }

    if (*metrics_cmd) {
      std::vector<ImageGrid> recons, truths;
      if (fs::is_directory(mt_recon)) {
        if (!fs::is_directory(mt_truth)) throw std::invalid_argument("--truth must be a directory when --recon is");
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(mt_recon)) {
          if (e.path().extension() == ".f32") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const fs::path& f : files) {
          const auto truth = match_truth(mt_truth, f.filename().string());
          if (!truth) continue;
          recons.push_back(read_image(f));
          truths.push_back(read_image(*truth));
        }
        if (recons.empty()) throw std::invalid_argument("no reconstruction/truth pairs found");
      } else {
        recons.push_back(read_image(mt_recon));
        truths.push_back(read_image(mt_truth));
      }
      const MetricReport report = evaluate_set(recons, truths, mt_name);
      write_report(out, report);
      if (!mt_out.empty()) {
        std::ofstream os(mt_out);
        write_report(os, report);
      }
      return 0;
    }

    if (*export_cmd) {
      const Tensor t = read_tensor(ex_in);
      const std::vector<double> values(t.data.begin(), t.data.end());
      write_preview(ex_out, t.rows, t.cols, values);
      out << "wrote " << ex_out << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace circradon
