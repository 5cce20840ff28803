#include "infogaze/io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace infogaze {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'S', 'M', 'A', 'P'};
constexpr std::uint32_t kMapVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is, const fs::path& path) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4))
    throw Error(Errc::truncated_file, "truncated map file '" + path.string() + "'");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is, const fs::path& path) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8))
    throw Error(Errc::truncated_file, "truncated map file '" + path.string() + "'");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

double parse_real(const std::string& s, long line_no) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error(Errc::malformed_row,
                "line " + std::to_string(line_no) + ": bad number '" + s + "'");
  return v;
}

long parse_int(const std::string& s, long line_no) {
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error(Errc::malformed_row,
                "line " + std::to_string(line_no) + ": bad integer '" + s + "'");
  return v;
}

}  // namespace

void write_map(const fs::path& path, const Grid& grid) {
  if (!grid.isFinite().all())
    throw Error(Errc::non_finite, "refusing to write non-finite grid");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(Errc::io_error, "cannot open '" + path.string() + "' for writing");
  os.write(kMagic, 4);
  put_u32(os, kMapVersion);
  put_u32(os, static_cast<std::uint32_t>(grid.cols()));
  put_u32(os, static_cast<std::uint32_t>(grid.rows()));
  for (Eigen::Index y = 0; y < grid.rows(); ++y)
    for (Eigen::Index x = 0; x < grid.cols(); ++x) put_f64(os, grid(y, x));
  if (!os) throw Error(Errc::io_error, "write failed for '" + path.string() + "'");
}

Grid read_map(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::io_error, "cannot open '" + path.string() + "'");
  char magic[4];
  if (!is.read(magic, 4))
    throw Error(Errc::truncated_file, "truncated map file '" + path.string() + "'");
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw Error(Errc::bad_magic, "bad magic in '" + path.string() + "'");
  const std::uint32_t version = get_u32(is, path);
  if (version != kMapVersion)
    throw Error(Errc::version_unsupported,
                "map version " + std::to_string(version) + " in '" + path.string() + "'");
  const std::uint32_t w = get_u32(is, path);
  const std::uint32_t h = get_u32(is, path);
  Grid g(h, w);
  for (std::uint32_t y = 0; y < h; ++y)
    for (std::uint32_t x = 0; x < w; ++x) g(y, x) = get_f64(is, path);
  return g;
}

std::vector<FixationTrain> parse_fixations_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(Errc::io_error, "cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(is, line))
    throw Error(Errc::malformed_header, "empty fixation file '" + path.string() + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "image_id,subject_id,x,y,t")
    throw Error(Errc::malformed_header, "expected header 'image_id,subject_id,x,y,t'");

  std::vector<FixationTrain> trains;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  long line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 5)
      throw Error(Errc::malformed_row,
                  "line " + std::to_string(line_no) + ": expected 5 cells");
    Fixation f;
    f.x = parse_real(cells[2], line_no);
    f.y = parse_real(cells[3], line_no);
    f.t = parse_real(cells[4], line_no);
    const std::pair<std::string, std::string> key{cells[0], cells[1]};
    auto it = index.find(key);
    if (it == index.end()) {
      index.emplace(key, trains.size());
      trains.push_back({cells[0], cells[1], {f}});
    } else {
      trains[it->second].fixations.push_back(f);
    }
  }
  return trains;
}

void write_fixations_csv(const fs::path& path, const std::vector<FixationTrain>& trains) {
  std::ostringstream os;
  os << "image_id,subject_id,x,y,t\n";
  for (const auto& t : trains)
    for (const auto& f : t.fixations)
      os << t.image_id << ',' << t.subject_id << ',' << format_double(f.x) << ','
         << format_double(f.y) << ',' << format_double(f.t) << '\n';
  write_text_file(path, os.str());
}

std::vector<ImageFrame> parse_frames_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(Errc::io_error, "cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(is, line))
    throw Error(Errc::malformed_header, "empty frame file '" + path.string() + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "image_id,width,height")
    throw Error(Errc::malformed_header, "expected header 'image_id,width,height'");
  std::vector<ImageFrame> frames;
  long line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 3)
      throw Error(Errc::malformed_row,
                  "line " + std::to_string(line_no) + ": expected 3 cells");
    frames.push_back({cells[0], static_cast<int>(parse_int(cells[1], line_no)),
                      static_cast<int>(parse_int(cells[2], line_no))});
  }
  return frames;
}

void write_frames_csv(const fs::path& path, const std::vector<ImageFrame>& frames) {
  std::ostringstream os;
  os << "image_id,width,height\n";
  for (const auto& f : frames)
    os << f.image_id << ',' << f.width << ',' << f.height << '\n';
  write_text_file(path, os.str());
}

RunConfig load_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(Errc::io_error, "cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << is.rdbuf();
  const std::string text = buf.str();

  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::bad_config, std::string("config parse error: ") + e.what());
  }

  RunConfig cfg;
  cfg.config_hash = hex64(fnv1a64(text));
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    const fs::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };

  try {
    cfg.frames_csv = resolve(j.at("dataset").at("frames_csv").get<std::string>());
    cfg.fixations_csv = resolve(j.at("dataset").at("fixations_csv").get<std::string>());
    for (const auto& m : j.value("models", json::array()))
      cfg.models.push_back(
          {m.at("model_id").get<std::string>(), resolve(m.at("map_dir").get<std::string>())});
    if (j.contains("stage")) cfg.stage = parse_stage(j.at("stage").get<std::string>());
    if (j.contains("optimizer")) {
      const auto& o = j.at("optimizer");
      cfg.max_iter = o.value("max_iter", cfg.max_iter);
      cfg.tolerance = o.value("tolerance", cfg.tolerance);
      cfg.seed = o.value("seed", cfg.seed);
    }
    if (j.contains("baseline")) {
      const auto& b = j.at("baseline");
      if (b.contains("bin_grid")) cfg.baseline_bin_grid = b.at("bin_grid").get<std::vector<int>>();
      if (b.contains("lambda_grid"))
        cfg.baseline_lambda_grid = b.at("lambda_grid").get<std::vector<double>>();
      if (b.contains("sigma_grid"))
        cfg.gold_sigma_grid = b.at("sigma_grid").get<std::vector<double>>();
      cfg.gold_folds = b.value("folds", cfg.gold_folds);
    }
    if (j.contains("metrics")) {
      const auto& m = j.at("metrics");
      cfg.kl_bins = m.value("kl_bins", cfg.kl_bins);
      cfg.kl_epsilon = m.value("kl_epsilon", cfg.kl_epsilon);
      cfg.auc_exhaustive = m.value("auc_exhaustive", cfg.auc_exhaustive);
      cfg.auc_sample_size = m.value("auc_sample_size", cfg.auc_sample_size);
    }
    if (j.contains("output_dir")) cfg.output_dir = resolve(j.at("output_dir").get<std::string>());
    cfg.jobs = j.value("jobs", 1);
  } catch (const json::exception& e) {
    throw Error(Errc::bad_config, std::string("config field error: ") + e.what());
  }

  if (!fs::exists(cfg.frames_csv))
    throw Error(Errc::bad_config, "frames_csv does not exist: " + cfg.frames_csv.string());
  if (!fs::exists(cfg.fixations_csv))
    throw Error(Errc::bad_config, "fixations_csv does not exist: " + cfg.fixations_csv.string());
  for (const auto& m : cfg.models)
    if (!fs::exists(m.map_dir))
      throw Error(Errc::bad_config,
                  "map_dir for model '" + m.model_id + "' does not exist: " + m.map_dir.string());
  return cfg;
}

Dataset load_dataset(const RunConfig& cfg, const std::vector<std::string>& model_ids) {
  Dataset d;
  d.frames = parse_frames_csv(cfg.frames_csv);
  d.trains = parse_fixations_csv(cfg.fixations_csv);
  for (const std::string& id : model_ids) {
    const ModelSpec* spec = nullptr;
    for (const auto& m : cfg.models)
      if (m.model_id == id) spec = &m;
    if (!spec) throw Error(Errc::bad_config, "model '" + id + "' not in config");
    for (const auto& frame : d.frames) {
      const fs::path p = spec->map_dir / (frame.image_id + ".smap");
      if (!fs::exists(p))
        throw Error(Errc::missing_map,
                    "missing map for (model=" + id + ", image=" + frame.image_id + "): " +
                        p.string());
      d.maps.emplace(std::make_pair(id, frame.image_id),
                     SaliencyMap{frame.image_id, id, read_map(p)});
    }
  }
  const auto violations = validate_dataset(d);
  if (!violations.empty()) {
    std::string msg = "dataset invalid:";
    for (const auto& v : violations) msg += "\n  " + v.entity + ": " + v.rule;
    throw Error(Errc::validation_failed, msg);
  }
  return d;
}

std::string calibration_params_to_json(const CalibrationParams& p) {
  json j;
  j["stage"] = stage_name(p.stage);
  j["nonlin_y"] = std::vector<double>(p.nonlinearity.y.data(),
                                      p.nonlinearity.y.data() + p.nonlinearity.y.size());
  if (p.center_bias) {
    j["cb_y"] = std::vector<double>(
        p.center_bias->profile.y.data(),
        p.center_bias->profile.y.data() + p.center_bias->profile.y.size());
    j["alpha"] = p.center_bias->alpha;
  }
  if (p.blur_sigma) j["sigma"] = *p.blur_sigma;
  return j.dump(2) + "\n";
}

CalibrationParams calibration_params_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::bad_config, std::string("params parse error: ") + e.what());
  }
  CalibrationParams p;
  p.stage = parse_stage(j.at("stage").get<std::string>());
  const auto ny = j.at("nonlin_y").get<std::vector<double>>();
  p.nonlinearity.y = Eigen::Map<const Eigen::VectorXd>(ny.data(), ny.size());
  if (j.contains("cb_y")) {
    CenterBias cb;
    const auto cy = j.at("cb_y").get<std::vector<double>>();
    cb.profile.y = Eigen::Map<const Eigen::VectorXd>(cy.data(), cy.size());
    cb.alpha = j.at("alpha").get<double>();
    p.center_bias = cb;
  }
  if (j.contains("sigma")) p.blur_sigma = j.at("sigma").get<double>();
  return p;
}

std::string temporal_params_to_json(const TemporalParams& p) {
  json j;
  j["delta"] = p.delta;
  j["sigma_t"] = p.sigma_t;
  j["alpha_t"] = p.alpha_t;
  return j.dump(2) + "\n";
}

TemporalParams temporal_params_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::bad_config, std::string("params parse error: ") + e.what());
  }
  return {j.at("delta").get<double>(), j.at("sigma_t").get<double>(),
          j.at("alpha_t").get<double>()};
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(Errc::io_error, "cannot open '" + path.string() + "' for writing");
  os << text;
  if (!os) throw Error(Errc::io_error, "write failed for '" + path.string() + "'");
}

void write_meta_sidecar(const fs::path& table_path, const RunConfig& cfg,
                        const std::string& generator) {
  json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["config_hash"] = cfg.config_hash;
  j["seed"] = cfg.seed;
  j["generator"] = generator;
  j["rng"] = "mt19937_64";
  fs::path p = table_path;
  p += ".meta.json";
  write_text_file(p, j.dump(2) + "\n");
}

std::string format_double(double v) {
  json j = v;
  return j.dump();
}

}  // namespace infogaze
