#include "artic/corpus/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace artic::corpus {

namespace {

// Strips a trailing '\r' so CRLF and LF files parse identically.
bool next_line(std::istream& is, std::string& line) {
  if (!std::getline(is, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

double parse_double(const std::string& token, const std::string& path, int line_no) {
  double v = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end)
    throw DataError(path + ":" + std::to_string(line_no) + ": bad number '" + token + "'");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

void write_double(std::FILE* f, double v) { std::fprintf(f, "%.17g", v); }

}  // namespace

void save_trajectory(const ArticulatoryTrajectory& traj, const std::string& path) {
  traj.validate();
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw DataError("cannot open for writing: " + path);
  std::fputs("time_s", f);
  for (const auto& name : channel_names()) std::fprintf(f, ",%s", name.c_str());
  std::fputc('\n', f);
  for (Eigen::Index t = 0; t < traj.frames.rows(); ++t) {
    write_double(f, static_cast<double>(t) / traj.frame_rate_hz);
    for (int c = 0; c < kNumChannels; ++c) {
      std::fputc(',', f);
      write_double(f, traj.frames(t, c));
    }
    std::fputc('\n', f);
  }
  std::fclose(f);
}

ArticulatoryTrajectory load_trajectory(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open: " + path);
  std::string line;
  if (!next_line(is, line)) throw DataError(path + ":1: empty trajectory file");
  auto header = split_csv(line);
  if (header.size() != kNumChannels + 1 || header[0] != "time_s")
    throw DataError(path + ":1: malformed header; expected time_s plus " +
                    std::to_string(kNumChannels) + " channel columns, got " +
                    std::to_string(header.size() > 0 ? header.size() - 1 : 0));
  for (int c = 0; c < kNumChannels; ++c)
    if (header[c + 1] != channel_names()[c])
      throw DataError(path + ":1: channel " + std::to_string(c) + " named '" + header[c + 1] +
                      "', expected '" + channel_names()[c] + "'");

  std::vector<std::array<double, kNumChannels>> rows;
  std::vector<double> times;
  int line_no = 1;
  while (next_line(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != kNumChannels + 1)
      throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(kNumChannels + 1) + " columns, got " +
                      std::to_string(fields.size()));
    times.push_back(parse_double(fields[0], path, line_no));
    std::array<double, kNumChannels> row{};
    for (int c = 0; c < kNumChannels; ++c) row[c] = parse_double(fields[c + 1], path, line_no);
    rows.push_back(row);
  }
  if (rows.empty()) throw DataError(path + ": no frames");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw DataError(path + ":" + std::to_string(static_cast<int>(i) + 2) +
                      ": non-monotone time column");

  ArticulatoryTrajectory traj;
  traj.frames.resize(static_cast<Eigen::Index>(rows.size()), kNumChannels);
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (int c = 0; c < kNumChannels; ++c) traj.frames(static_cast<Eigen::Index>(t), c) = rows[t][c];
  // infer the rate from the time column; a single frame defaults to 100 Hz
  traj.frame_rate_hz = rows.size() > 1
                           ? (static_cast<double>(times.size() - 1)) / (times.back() - times.front())
                           : 100.0;
  traj.validate();
  return traj;
}

void save_alignment(const PhonemeAlignment& alignment, const std::string& path) {
  alignment.validate();
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw DataError("cannot open for writing: " + path);
  for (const auto& iv : alignment.intervals) {
    write_double(f, iv.start_s);
    std::fputc(' ', f);
    write_double(f, iv.end_s);
    std::fprintf(f, " %s\n", iv.phoneme.c_str());
  }
  std::fclose(f);
}

PhonemeAlignment load_alignment(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open: " + path);
  PhonemeAlignment alignment;
  std::string line;
  int line_no = 0;
  while (next_line(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string a, b, ph;
    if (!(ss >> a >> b >> ph))
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected 'start_s end_s phoneme'");
    std::string extra;
    if (ss >> extra)
      throw DataError(path + ":" + std::to_string(line_no) + ": trailing content '" + extra + "'");
    alignment.intervals.push_back(
        {ph, parse_double(a, path, line_no), parse_double(b, path, line_no)});
  }
  try {
    alignment.validate();
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
  return alignment;
}

void save_proxy(const MatX& proxy, double frame_rate_hz, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw DataError("cannot open for writing: " + path);
  std::fputs("time_s", f);
  for (Eigen::Index c = 0; c < proxy.cols(); ++c) std::fprintf(f, ",a%02d", static_cast<int>(c));
  std::fputc('\n', f);
  for (Eigen::Index t = 0; t < proxy.rows(); ++t) {
    write_double(f, static_cast<double>(t) / frame_rate_hz);
    for (Eigen::Index c = 0; c < proxy.cols(); ++c) {
      std::fputc(',', f);
      write_double(f, proxy(t, c));
    }
    std::fputc('\n', f);
  }
  std::fclose(f);
}

MatX load_proxy(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open: " + path);
  std::string line;
  if (!next_line(is, line)) throw DataError(path + ":1: empty proxy file");
  const std::size_t cols = split_csv(line).size() - 1;
  if (cols == 0) throw DataError(path + ":1: malformed proxy header");
  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (next_line(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != cols + 1)
      throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(cols + 1) + " columns");
    std::vector<double> row(cols);
    for (std::size_t c = 0; c < cols; ++c) row[c] = parse_double(fields[c + 1], path, line_no);
    rows.push_back(std::move(row));
  }
  MatX out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t c = 0; c < cols; ++c)
      out(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) = rows[t][c];
  return out;
}

}  // namespace artic::corpus
