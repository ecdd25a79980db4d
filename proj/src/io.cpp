#include "xfield/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "xfield/checksum.hpp"
#include "xfield/error.hpp"

namespace xfield::io {

using nlohmann::json;

namespace {

std::string type_name(ElementType t) { return t == ElementType::UInt8 ? "uint8" : "float64"; }

ElementType parse_type(const std::string& s) {
  if (s == "uint8") return ElementType::UInt8;
  if (s == "float64") return ElementType::Float64;
  throw FormatError("unknown element type '" + s + "'");
}

std::vector<std::byte> encode_f64(std::span<const double> values) {
  std::vector<std::byte> out(values.size() * 8);
  std::memcpy(out.data(), values.data(), out.size());
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < out.size(); i += 8) std::reverse(out.begin() + i, out.begin() + i + 8);
  return out;
}

std::vector<double> decode_f64(std::vector<std::byte> bytes) {
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < bytes.size(); i += 8) std::reverse(bytes.begin() + i, bytes.begin() + i + 8);
  std::vector<double> out(bytes.size() / 8);
  std::memcpy(out.data(), bytes.data(), out.size() * 8);
  return out;
}

LatticeSpec lattice_from(const json& j) {
  LatticeSpec s;
  s.dims = j.at("dims").get<std::vector<std::size_t>>();
  s.voxel_size = j.contains("voxel_size") ? j.at("voxel_size").get<std::vector<double>>()
                                          : std::vector<double>(s.dims.size(), 1.0);
  s.validate();
  return s;
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  if (s == "nan" || s == "NaN") return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw FormatError("not a number: '" + s + "'");
  return v;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

// Runs a parse step, turning JSON access failures into FormatError.
template <typename Fn>
auto parsing(const fs::path& path, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace

std::size_t element_size(ElementType t) { return t == ElementType::UInt8 ? 1 : 8; }

std::size_t VolumeHeader::payload_bytes() const {
  return lattice.site_count() * planes * element_size(type);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

void write_volume(const fs::path& path, VolumeHeader header, std::span<const std::byte> payload) {
  header.lattice.validate();
  if (header.planes < 1) throw ShapeError("volume needs at least one plane");
  if (payload.size() != header.payload_bytes())
    throw ShapeError("payload has " + std::to_string(payload.size()) + " bytes, header implies " +
                     std::to_string(header.payload_bytes()));
  header.checksum = crc32_bytes(payload);
  char crc[16];
  std::snprintf(crc, sizeof crc, "%08x", header.checksum);
  json h = {{"magic", header.magic},
            {"dims", header.lattice.dims},
            {"voxel_size", header.lattice.voxel_size},
            {"dtype", type_name(header.type)},
            {"planes", header.planes},
            {"k", header.k},
            {"endianness", "little"},
            {"checksum", std::string(crc)}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  const std::string line = h.dump() + "\n";
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::pair<VolumeHeader, std::vector<std::byte>> read_volume(const fs::path& path) {
  const std::string raw = read_text(path);
  const auto nl = raw.find('\n');
  if (nl == std::string::npos) throw FormatError(path.string() + ": missing volume header line");
  json h;
  try {
    h = json::parse(raw.substr(0, nl));
  } catch (const json::exception&) {
    throw FormatError(path.string() + ": volume header is not JSON");
  }
  VolumeHeader header;
  parsing(path, [&] {
    header.magic = h.at("magic").get<std::string>();
    if (header.magic != kVolumeMagic) throw FormatError(path.string() + ": bad magic '" + header.magic + "'");
    header.lattice = lattice_from(h);
    header.type = parse_type(h.at("dtype").get<std::string>());
    header.planes = h.at("planes").get<std::size_t>();
    header.k = h.value("k", 0);
    header.endianness = h.at("endianness").get<std::string>();
    header.checksum = static_cast<std::uint32_t>(std::stoul(h.at("checksum").get<std::string>(), nullptr, 16));
    return 0;
  });
  if (header.endianness != "little") throw FormatError(path.string() + ": payload must be little-endian");
  const std::size_t have = raw.size() - nl - 1;
  if (have != header.payload_bytes())
    throw ChecksumError(path.string() + ": payload is " + std::to_string(have) + " bytes, expected " +
                        std::to_string(header.payload_bytes()));
  std::vector<std::byte> payload(have);
  std::memcpy(payload.data(), raw.data() + nl + 1, have);
  if (crc32_bytes(payload) != header.checksum) throw ChecksumError(path.string() + ": checksum mismatch");
  return {header, std::move(payload)};
}

void write_labels(const fs::path& path, const LatticeSpec& spec, const LabelField& z) {
  z.validate(spec.site_count());
  VolumeHeader h;
  h.lattice = spec;
  h.type = ElementType::UInt8;
  h.k = z.k;
  write_volume(path, h, std::as_bytes(std::span<const std::uint8_t>(z.labels)));
}

std::pair<LatticeSpec, LabelField> read_labels(const fs::path& path) {
  auto [h, bytes] = read_volume(path);
  if (h.type != ElementType::UInt8 || h.planes != 1) throw FormatError(path.string() + ": not a label volume");
  LabelField z(h.lattice.site_count(), h.k);
  std::memcpy(z.labels.data(), bytes.data(), bytes.size());
  if (z.k == 0) z.k = *std::max_element(z.labels.begin(), z.labels.end());
  z.validate(h.lattice.site_count());
  return {h.lattice, z};
}

void write_planes(const fs::path& path, const LatticeSpec& spec, std::span<const double> values, std::size_t planes) {
  VolumeHeader h;
  h.lattice = spec;
  h.type = ElementType::Float64;
  h.planes = planes;
  const auto bytes = encode_f64(values);
  write_volume(path, h, bytes);
}

std::pair<VolumeHeader, std::vector<double>> read_planes(const fs::path& path) {
  auto [h, bytes] = read_volume(path);
  if (h.type != ElementType::Float64) throw FormatError(path.string() + ": not a float64 volume");
  return {h, decode_f64(std::move(bytes))};
}

void write_image(const fs::path& path, const ImageVolume& y) {
  if (y.size() != y.spec.site_count()) throw ShapeError("image payload does not match its lattice");
  write_planes(path, y.spec, y.values, 1);
}

ImageVolume read_image(const fs::path& path) {
  auto [h, values] = read_planes(path);
  if (h.planes != 1) throw FormatError(path.string() + ": image volumes have one plane");
  return {h.lattice, std::move(values)};
}

namespace {

json hyper_json(const DeltaHyper& hyper) {
  json j = {{"mu_delta", hyper.global.mu}, {"sigma2_delta", hyper.global.sigma2}};
  json per = json::object();
  for (const auto& [label, p] : hyper.per_label)
    per[std::to_string(label)] = {{"mu_delta", p.mu}, {"sigma2_delta", p.sigma2}};
  j["per_label"] = per;
  return j;
}

DeltaParams params_from(const json& j, DeltaParams fallback) {
  DeltaParams p = fallback;
  if (j.contains("mu_delta")) p.mu = j.at("mu_delta").get<double>();
  if (j.contains("sigma2_delta")) p.sigma2 = j.at("sigma2_delta").get<double>();
  else if (j.contains("sigma_delta")) p.sigma2 = std::pow(j.at("sigma_delta").get<double>(), 2);
  return p;
}

DeltaHyper hyper_from(const json& j) {
  DeltaHyper h;
  h.global = params_from(j, DeltaParams{});
  if (j.contains("per_label"))
    for (const auto& [key, v] : j.at("per_label").items()) h.per_label[std::stoi(key)] = params_from(v, h.global);
  h.validate();
  return h;
}

}  // namespace

void write_field_prior(const fs::path& path, const LatticeSpec& spec, const FieldPrior& field) {
  if (field.n != spec.site_count()) throw ShapeError("field prior does not match lattice");
  write_planes(path, spec, field.log_density, static_cast<std::size_t>(field.k));
  char crc[16];
  std::snprintf(crc, sizeof crc, "%08x", field.source_checksum);
  json side = {{"dims", spec.dims},
               {"voxel_size", spec.voxel_size},
               {"k", field.k},
               {"hyper", hyper_json(field.hyper)},
               {"reference_checksum", std::string(crc)},
               {"mode", to_string(field.mode)},
               {"floor", kLogDensityFloor}};
  write_json(fs::path(path.string() + ".json"), side);
}

std::pair<LatticeSpec, FieldPrior> read_field_prior(const fs::path& path) {
  auto [h, values] = read_planes(path);
  const fs::path side_path(path.string() + ".json");
  const json side = read_json(side_path);
  FieldPrior f;
  f.n = h.lattice.site_count();
  f.k = static_cast<int>(h.planes);
  f.log_density = std::move(values);
  parsing(side_path, [&] {
    f.hyper = hyper_from(side.at("hyper"));
    f.mode = parse_field_mode(side.at("mode").get<std::string>());
    f.source_checksum =
        static_cast<std::uint32_t>(std::stoul(side.at("reference_checksum").get<std::string>(), nullptr, 16));
    if (side.at("k").get<int>() != f.k) throw FormatError(side_path.string() + ": k disagrees with the volume");
    return 0;
  });
  f.validate();
  return {h.lattice, std::move(f)};
}

void write_path_table(const fs::path& csv_path, const PathTable& table) {
  table.validate();
  std::string csv = "beta,expected_stat\n";
  for (std::size_t g = 0; g < table.beta_grid.size(); ++g)
    csv += format_double(table.beta_grid[g]) + "," + format_double(table.expected_stat[g]) + "\n";
  write_text(csv_path, csv);
  fs::path side = csv_path;
  side.replace_extension(".json");
  write_json(side, {{"dims", table.meta.dims},
                    {"k", table.meta.k},
                    {"sweeps", table.meta.sweeps},
                    {"burnin", table.meta.burnin},
                    {"seed", table.meta.seed}});
}

PathTable read_path_table(const fs::path& csv_path) {
  const auto lines = read_lines(csv_path);
  if (lines.empty() || lines.front() != "beta,expected_stat")
    throw FormatError(csv_path.string() + ": expected header 'beta,expected_stat'");
  PathTable t;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split(lines[r], ',');
    if (cells.size() != 2) throw FormatError(csv_path.string() + ": row " + std::to_string(r) + " needs two cells");
    t.beta_grid.push_back(parse_double(cells[0]));
    t.expected_stat.push_back(parse_double(cells[1]));
  }
  fs::path side = csv_path;
  side.replace_extension(".json");
  if (fs::exists(side)) {
    const json m = read_json(side);
    parsing(side, [&] {
      t.meta.dims = m.at("dims").get<std::vector<std::size_t>>();
      t.meta.k = m.at("k").get<int>();
      t.meta.sweeps = m.at("sweeps").get<std::size_t>();
      t.meta.burnin = m.at("burnin").get<std::size_t>();
      t.meta.seed = m.at("seed").get<std::uint64_t>();
      return 0;
    });
  }
  try {
    t.validate();
  } catch (const InvalidConfig& e) {
    throw FormatError(csv_path.string() + ": " + e.what());
  }
  return t;
}

std::string traces_csv(const ChainResult& r, const std::vector<std::string>& names) {
  const auto k = static_cast<std::size_t>(r.k);
  auto name = [&](std::size_t j) { return j < names.size() ? names[j] : std::to_string(j + 1); };
  std::string csv = "iteration,beta,stat";
  const bool with_truth = !r.correct_trace.empty();
  if (with_truth) csv += ",correct";
  for (std::size_t j = 0; j < k; ++j) csv += ",mu_" + name(j);
  for (std::size_t j = 0; j < k; ++j) csv += ",sigma2_" + name(j);
  csv += "\n";
  for (std::size_t t = 0; t < r.beta_trace.size(); ++t) {
    csv += std::to_string(t) + "," + format_double(r.beta_trace[t]) + "," + std::to_string(r.stat_trace[t]);
    if (with_truth) csv += "," + std::to_string(r.correct_trace[t]);
    for (std::size_t j = 0; j < k; ++j) csv += "," + format_double(r.mu_trace[t * k + j]);
    for (std::size_t j = 0; j < k; ++j) csv += "," + format_double(r.sigma2_trace[t * k + j]);
    csv += "\n";
  }
  return csv;
}

void write_chain_result(const fs::path& dir, const LatticeSpec& spec, const ChainResult& r,
                        const std::vector<std::string>& names) {
  fs::create_directories(dir);
  write_text(dir / "traces.csv", traces_csv(r, names));
  std::vector<double> counts(r.counts.begin(), r.counts.end());
  write_planes(dir / "counts.vol", spec, counts, static_cast<std::size_t>(r.k));
  write_labels(dir / "modal.vol", spec, r.modal);
  write_json(dir / "chain.json", {{"n", r.n},
                                  {"k", r.k},
                                  {"iterations", r.iterations},
                                  {"burnin", r.burnin},
                                  {"thin", r.thin},
                                  {"retained", r.retained},
                                  {"beta_accepted", r.beta_accepted},
                                  {"final_proposal_sd", r.final_proposal_sd},
                                  {"posterior_mean_beta", r.posterior_mean_beta()}});
}

ChainResult read_chain_result(const fs::path& dir) {
  ChainResult r;
  const json meta = read_json(dir / "chain.json");
  parsing(dir / "chain.json", [&] {
    r.n = meta.at("n").get<std::size_t>();
    r.k = meta.at("k").get<int>();
    r.iterations = meta.at("iterations").get<std::size_t>();
    r.burnin = meta.at("burnin").get<std::size_t>();
    r.thin = meta.at("thin").get<std::size_t>();
    r.retained = meta.at("retained").get<std::size_t>();
    r.beta_accepted = meta.value("beta_accepted", std::size_t{0});
    r.final_proposal_sd = meta.value("final_proposal_sd", 0.0);
    return 0;
  });
  auto [h, counts] = read_planes(dir / "counts.vol");
  if (h.lattice.site_count() != r.n || h.planes != static_cast<std::size_t>(r.k))
    throw FormatError((dir / "counts.vol").string() + ": shape disagrees with chain.json");
  r.counts.reserve(counts.size());
  for (double c : counts) r.counts.push_back(static_cast<std::uint32_t>(c));
  r.modal = read_labels(dir / "modal.vol").second;

  const auto lines = read_lines(dir / "traces.csv");
  if (lines.empty()) throw FormatError((dir / "traces.csv").string() + ": empty");
  const auto header = split(lines.front(), ',');
  const bool with_truth = header.size() > 3 && header[3] == "correct";
  const std::size_t first_mu = with_truth ? 4 : 3;
  const auto k = static_cast<std::size_t>(r.k);
  if (header.size() != first_mu + 2 * k) throw FormatError((dir / "traces.csv").string() + ": unexpected columns");
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto c = split(lines[l], ',');
    if (c.size() != header.size()) throw FormatError((dir / "traces.csv").string() + ": ragged row");
    r.beta_trace.push_back(parse_double(c[1]));
    r.stat_trace.push_back(static_cast<SufficientStat>(std::stoull(c[2])));
    if (with_truth) r.correct_trace.push_back(std::stoll(c[3]));
    for (std::size_t j = 0; j < k; ++j) r.mu_trace.push_back(parse_double(c[first_mu + j]));
    for (std::size_t j = 0; j < k; ++j) r.sigma2_trace.push_back(parse_double(c[first_mu + k + j]));
  }
  return r;
}

void write_delta_prior(const fs::path& path, const DeltaPriorState& state) {
  json labels = json::array();
  for (std::size_t j = 0; j < state.per_label.size(); ++j) {
    const auto& p = state.per_label[j];
    labels.push_back({{"label", j + 1}, {"n", p.n_prior}, {"mu", p.mu_prior}, {"sigma2", p.sigma2_prior}});
  }
  write_json(path, {{"labels", labels}});
}

DeltaPriorState read_delta_prior(const fs::path& path) {
  const json j = read_json(path);
  DeltaPriorState s;
  parsing(path, [&] {
    for (const auto& e : j.at("labels")) {
      const auto label = e.at("label").get<std::size_t>();
      if (label != s.per_label.size() + 1) throw FormatError(path.string() + ": labels must be listed 1..k in order");
      s.per_label.push_back({e.at("n").get<double>(), e.at("mu").get<double>(), e.at("sigma2").get<double>()});
    }
    return 0;
  });
  s.validate();
  return s;
}

DeltaHyper read_delta_hyper(const fs::path& path) {
  const json j = read_json(path);
  return parsing(path, [&] { return hyper_from(j); });
}

void write_delta_hyper(const fs::path& path, const DeltaHyper& hyper) { write_json(path, hyper_json(hyper)); }

NoisePriors read_noise_priors(const fs::path& path) {
  const json j = read_json(path);
  NoisePriors p;
  parsing(path, [&] {
    for (const auto& c : j.at("components"))
      p.components.push_back({c.value("name", std::string{}), c.at("m").get<double>(), c.at("phi2").get<double>(),
                              c.at("nu").get<double>(), c.at("s2").get<double>()});
    return 0;
  });
  p.validate();
  return p;
}

void write_noise_priors(const fs::path& path, const NoisePriors& priors) {
  json comps = json::array();
  for (const auto& c : priors.components)
    comps.push_back({{"name", c.name}, {"m", c.m}, {"phi2", c.phi2}, {"nu", c.nu}, {"s2", c.s2}});
  write_json(path, {{"components", comps}});
}

PhantomSpec read_phantom_spec(const fs::path& path) {
  const json j = read_json(path);
  PhantomSpec s = PhantomSpec::ed_default();
  parsing(path, [&] {
    if (j.contains("dims")) s.lattice = lattice_from(j);
    s.body_radius = j.value("body_radius", s.body_radius);
    s.body_label = j.value("body_label", s.body_label);
    s.background_label = j.value("background_label", s.background_label);
    if (j.contains("classes")) {
      s.classes.clear();
      for (const auto& c : j.at("classes"))
        s.classes.push_back({c.value("name", std::string{}), c.at("mean").get<double>(), c.at("sd").get<double>()});
    }
    if (j.contains("inserts")) {
      s.inserts.clear();
      for (const auto& e : j.at("inserts")) {
        const auto ring = e.value("ring", std::string("outer"));
        if (ring != "inner" && ring != "outer") throw FormatError(path.string() + ": ring must be inner|outer");
        const auto c = e.at("centre").get<std::vector<double>>();
        if (c.size() != 2) throw FormatError(path.string() + ": insert centre needs two coordinates");
        s.inserts.push_back({e.at("label").get<int>(), {c[0], c[1]}, e.at("radius").get<double>(),
                             ring == "inner" ? Ring::Inner : Ring::Outer});
      }
    }
    s.inner_rotation_deg = j.value("inner_rotation_deg", s.inner_rotation_deg);
    if (j.contains("translation")) {
      const auto t = j.at("translation").get<std::vector<double>>();
      if (t.size() != 2) throw FormatError(path.string() + ": translation needs two coordinates");
      s.translation = {t[0], t[1]};
    }
    if (j.contains("bias")) {
      const auto& b = j.at("bias");
      s.bias_amplitude = b.value("amplitude", s.bias_amplitude);
      s.bias_length_scale = b.value("length_scale", s.bias_length_scale);
      s.bias_modes = b.value("modes", s.bias_modes);
    }
    s.seed = j.value("seed", s.seed);
    return 0;
  });
  s.validate();
  return s;
}

void write_phantom_spec(const fs::path& path, const PhantomSpec& s) {
  json classes = json::array(), inserts = json::array();
  for (const auto& c : s.classes) classes.push_back({{"name", c.name}, {"mean", c.mean}, {"sd", c.sd}});
  for (const auto& ins : s.inserts)
    inserts.push_back({{"label", ins.label},
                       {"centre", {ins.centre[0], ins.centre[1]}},
                       {"radius", ins.radius},
                       {"ring", ins.ring == Ring::Inner ? "inner" : "outer"}});
  write_json(path, {{"dims", s.lattice.dims},
                    {"voxel_size", s.lattice.voxel_size},
                    {"body_radius", s.body_radius},
                    {"body_label", s.body_label},
                    {"background_label", s.background_label},
                    {"classes", classes},
                    {"inserts", inserts},
                    {"inner_rotation_deg", s.inner_rotation_deg},
                    {"translation", {s.translation[0], s.translation[1]}},
                    {"bias", {{"amplitude", s.bias_amplitude},
                              {"length_scale", s.bias_length_scale},
                              {"modes", s.bias_modes}}},
                    {"seed", s.seed}});
}

void write_score_file(const fs::path& path, const ScoreFile& s) {
  std::string csv = "tissue," + s.variant + "\n";
  for (std::size_t j = 0; j < s.dice.size(); ++j)
    csv += (j < s.names.size() && !s.names[j].empty() ? s.names[j] : std::to_string(j + 1)) + "," +
           format_double(s.dice[j]) + "\n";
  csv += "misclassification," + format_double(s.misclassification) + "\n";
  csv += "beta_mean," + format_double(s.beta_mean) + "\n";
  csv += "sigma_delta," + format_double(s.sigma_delta) + "\n";
  write_text(path, csv);
}

ScoreFile read_score_file(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.size() < 4) throw FormatError(path.string() + ": too few rows for a score file");
  const auto head = split(lines.front(), ',');
  if (head.size() != 2 || head[0] != "tissue") throw FormatError(path.string() + ": expected header 'tissue,<variant>'");
  ScoreFile s;
  s.variant = head[1];
  bool have_mis = false, have_beta = false, have_sigma = false;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto c = split(lines[l], ',');
    if (c.size() != 2) throw FormatError(path.string() + ": rows need two cells");
    const double v = parse_double(c[1]);
    if (c[0] == "misclassification") {
      s.misclassification = v;
      have_mis = true;
    } else if (c[0] == "beta_mean") {
      s.beta_mean = v;
      have_beta = true;
    } else if (c[0] == "sigma_delta") {
      s.sigma_delta = v;
      have_sigma = true;
    } else {
      s.names.push_back(c[0]);
      s.dice.push_back(v);
    }
  }
  if (!have_mis || !have_beta || !have_sigma) throw FormatError(path.string() + ": missing summary rows");
  return s;
}

}  // namespace xfield::io
