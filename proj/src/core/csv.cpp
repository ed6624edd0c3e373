#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spw/data.hpp"
#include "spw/error.hpp"

namespace spw {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_row(std::string_view line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.emplace_back(trim(cur));
  return cells;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_integer(std::string_view s, std::int64_t& out) {
  s = trim(s);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec == std::errc() && ptr == s.data() + s.size()) return true;
  double d;
  if (!parse_double(s, d) || !std::isfinite(d) || d != std::floor(d) ||
      std::fabs(d) > 9.0e15)
    return false;
  out = static_cast<std::int64_t>(d);
  return true;
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end())
    fail(ErrorCode::MissingColumn, "missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Dataset parse_csv(const std::string& text, const CsvSchema& schema) {
  std::vector<std::string> lines;
  {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (lines.empty() && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
      if (trim(line).empty()) continue;
      lines.push_back(line);
    }
  }
  if (lines.empty()) fail(ErrorCode::EmptyDataset, "input has no header row");
  if (lines.size() == 1) fail(ErrorCode::EmptyDataset, "input has no data rows");

  const auto header = split_row(lines[0]);
  const std::size_t n = lines.size() - 1;
  std::vector<std::vector<std::string>> rows(n);
  for (std::size_t r = 0; r < n; ++r) {
    rows[r] = split_row(lines[r + 1]);
    if (rows[r].size() != header.size())
      fail(ErrorCode::ParseError,
           "row " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) +
               " fields, header has " + std::to_string(header.size()),
           static_cast<std::int64_t>(r + 1));
  }

  const std::size_t cy = find_column(header, schema.y);
  const std::size_t cw = find_column(header, schema.w);
  std::vector<std::size_t> cx;
  for (const auto& name : schema.x) cx.push_back(find_column(header, name));
  std::vector<std::size_t> creq;
  for (const auto& name : schema.required) creq.push_back(find_column(header, name));
  if (schema.mode == DatasetMode::FiniteSample)
    require(cx.size() == 1, "finite-sample mode needs exactly one stratum column");

  auto numeric_cell = [&](std::size_t r, std::size_t c, const std::string& what) {
    double v;
    auto row = static_cast<std::int64_t>(r + 1);
    if (!parse_double(rows[r][c], v))
      fail(ErrorCode::ParseError,
           "cannot parse " + what + " '" + rows[r][c] + "' in row " + std::to_string(row), row);
    if (!std::isfinite(v))
      fail(ErrorCode::NonFiniteValue,
           "non-finite " + what + " in row " + std::to_string(row), row);
    return v;
  };

  Dataset d;
  d.mode = schema.mode;
  d.y.resize(n);
  d.w.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    d.y[r] = numeric_cell(r, cy, "outcome '" + schema.y + "'");
    std::int64_t wv;
    auto row = static_cast<std::int64_t>(r + 1);
    if (!parse_integer(rows[r][cw], wv) || wv < 0 || wv > 1000000 ||
        (schema.max_treatment && wv > *schema.max_treatment))
      fail(ErrorCode::UnknownTreatmentLabel,
           "unknown treatment label '" + rows[r][cw] + "' in row " + std::to_string(row), row);
    d.w[r] = static_cast<int>(wv);
  }
  for (std::size_t k = 0; k < creq.size(); ++k)
    for (std::size_t r = 0; r < n; ++r) numeric_cell(r, creq[k], "value in '" + schema.required[k] + "'");

  std::vector<bool> used(header.size(), false);
  used[cy] = used[cw] = true;
  std::vector<std::int64_t> labels;
  if (schema.mode == DatasetMode::FiniteSample) {
    used[cx[0]] = true;
    d.stratum_name = header[cx[0]];
    labels.resize(n);
    for (std::size_t r = 0; r < n; ++r)
      if (!parse_integer(rows[r][cx[0]], labels[r]))
        fail(ErrorCode::ParseError,
             "stratum label '" + rows[r][cx[0]] + "' in row " + std::to_string(r + 1) +
                 " is not an integer",
             static_cast<std::int64_t>(r + 1));
  } else {
    if (cx.empty()) {
      for (std::size_t c = 0; c < header.size(); ++c) {
        if (c == cy || c == cw) continue;
        if (std::find(creq.begin(), creq.end(), c) != creq.end()) continue;
        cx.push_back(c);
      }
    }
    for (std::size_t c : cx) {
      used[c] = true;
      d.covariate_names.push_back(header[c]);
    }
    d.covariates.resize(n * cx.size());
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t j = 0; j < cx.size(); ++j)
        d.covariates[r * cx.size() + j] = numeric_cell(r, cx[j], "covariate '" + header[cx[j]] + "'");
  }

  // remaining columns are kept when every cell is numeric
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (used[c]) continue;
    std::vector<double> values(n);
    bool ok = true;
    for (std::size_t r = 0; r < n && ok; ++r)
      ok = parse_double(rows[r][c], values[r]) && std::isfinite(values[r]);
    if (ok) d.extra.emplace_back(header[c], std::move(values));
  }

  int mx = 1;
  for (int v : d.w) mx = std::max(mx, v);
  d.levels = schema.max_treatment ? std::max(*schema.max_treatment, 1) + 1 : mx + 1;

  if (schema.mode == DatasetMode::FiniteSample) {
    Dataset tmp = make_finite_dataset(std::move(d.y), std::move(d.w), labels, d.levels);
    tmp.stratum_name = d.stratum_name;
    tmp.outcome_name = schema.y;
    tmp.treatment_name = schema.w;
    tmp.extra = std::move(d.extra);
    validate(tmp);
    return tmp;
  }
  d.outcome_name = schema.y;
  d.treatment_name = schema.w;
  validate(d);
  return d;
}

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), schema);
}

std::string to_csv(const Dataset& data) {
  std::string out = data.outcome_name + "," + data.treatment_name;
  if (data.mode == DatasetMode::FiniteSample) {
    out += "," + data.stratum_name;
  } else {
    for (const auto& name : data.covariate_names) out += "," + name;
  }
  for (const auto& [key, values] : data.extra) out += "," + key;
  out += "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    out += fmt17(data.y[i]);
    out += "," + std::to_string(data.w[i]);
    if (data.mode == DatasetMode::FiniteSample) {
      out += "," + std::to_string(data.stratum_labels[static_cast<std::size_t>(data.stratum[i])]);
    } else {
      for (std::size_t j = 0; j < data.num_covariates(); ++j) out += "," + fmt17(data.covariate(i, j));
    }
    for (const auto& col : data.extra) out += "," + fmt17(col.second[i]);
    out += "\n";
  }
  return out;
}

void write_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path + "'");
  out << to_csv(data);
  if (!out) fail(ErrorCode::Io, "write to '" + path + "' failed");
}

}  // namespace spw
