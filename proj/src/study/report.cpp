#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dbc/errors.hpp"
#include "dbc/study.hpp"

namespace dbc {

namespace {

// shortest representation that parses back to the same double
std::string exact(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw IOFailure("cannot open " + tmp.string() + " for writing");
    os << content;
    if (!os) throw IOFailure("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IOFailure("cannot move report into place at " + path.string() + ": " + ec.message());
}

}  // namespace

std::string report_csv(const EOCReport& r) {
  std::ostringstream os;
  os << "level,h,dofs,bdofs,error,eoc,toc_s,toc_r,iters,seconds\n";
  for (const auto& l : r.levels) {
    os << l.level << "," << exact(l.h) << "," << l.dofs << "," << l.bdofs << "," << exact(l.error) << ","
       << exact(l.eoc) << "," << exact(r.rate.s) << "," << r.rate.r << "," << l.iterations << ","
       << exact(l.seconds) << "\n";
  }
  return os.str();
}

nlohmann::json report_json(const EOCReport& r) {
  nlohmann::json j;
  j["config"] = r.config.to_json();
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : r.levels) {
    levels.push_back({{"level", l.level},
                      {"h", l.h},
                      {"dofs", l.dofs},
                      {"bdofs", l.bdofs},
                      {"error", l.error},
                      {"eoc", finite_or_null(l.eoc)},
                      {"iterations", l.iterations},
                      {"cg_iterations", l.cg_iterations},
                      {"residual", l.residual},
                      {"vi_violation", l.vi_violation},
                      {"epsilon", l.epsilon},
                      {"seconds", l.seconds}});
  }
  j["levels"] = levels;
  j["headline_eoc"] = finite_or_null(r.headline_eoc);
  j["lsq_slope"] = finite_or_null(r.lsq_slope);
  j["rate"] = {{"s", r.rate.s},
               {"r", r.rate.r},
               {"log_quarter", r.rate.log_quarter},
               {"source", r.rate.source},
               {"lambda", r.rate.lambda},
               {"Lambda", finite_or_null(r.rate.big_lambda)}};
  j["band"] = {finite_or_null(r.band.first), finite_or_null(r.band.second)};
  j["verdict"] = r.verdict;
  j["verdict_text"] = r.verdict_text;
  return j;
}

void emit_report(const EOCReport& r, const std::string& dir, const std::string& stem) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IOFailure("cannot create output directory " + dir + ": " + ec.message());
  const std::filesystem::path base = std::filesystem::path(dir) / stem;
  write_atomic(base.string() + ".csv", report_csv(r));
  write_atomic(base.string() + ".json", report_json(r).dump(2) + "\n");
  std::ostringstream plot;
  plot << "# log10(h) log10(error)\n";
  for (const auto& l : r.levels) plot << exact(std::log10(l.h)) << " " << exact(std::log10(l.error)) << "\n";
  write_atomic(base.string() + ".dat", plot.str());
}

}  // namespace dbc
