#include "percept/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "percept/error.hpp"

namespace percept {

const std::vector<std::string> kTrialColumns = {
    "participant_id", "task",  "trial_id", "stim_id", "distance_cm", "px_per_cm",
    "chart_w_px",     "chart_h_px", "x_min", "x_max", "y_min",       "y_max",
    "true_x",         "true_y", "resp_x",  "resp_y",  "condition"};

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_number(const std::string& text, const std::string& where) {
  const char* b = text.data();
  const char* e = b + text.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && e[-1] == ' ') --e;
  if (b < e && *b == '+') ++b;
  double v = 0.0;
  const auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc() || r.ptr != e || b == e)
    throw SchemaError(where + ": \"" + text + "\" is not a number");
  return v;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw SchemaError("missing column \"" + name + "\"");
}

namespace {

// RFC 4180 style: quoted fields may hold commas, quotes ("") and newlines.
bool next_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line) {
  fields.clear();
  std::string cur;
  bool in_quotes = false, any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          cur += '"';
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        cur += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c == '\n') {
      ++line;
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      fields.push_back(std::move(cur));
      return true;
    } else {
      cur += c;
    }
  }
  if (!any) return false;
  if (!cur.empty() && cur.back() == '\r') cur.pop_back();
  fields.push_back(std::move(cur));
  return true;
}

}  // namespace

CsvTable parse_csv(std::istream& in, const std::string& source) {
  CsvTable t;
  std::size_t line = 0;
  std::vector<std::string> fields;
  if (!next_record(in, fields, line)) throw SchemaError(source + ": empty file (header row required)");
  if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
  t.header = fields;
  for (;;) {
    const std::size_t start = line + 1;
    if (!next_record(in, fields, line)) break;
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != t.header.size())
      throw SchemaError(source + ":" + std::to_string(start) + ": expected " +
                        std::to_string(t.header.size()) + " fields, found " +
                        std::to_string(fields.size()));
    t.rows.push_back(fields);
    t.line_numbers.push_back(start);
  }
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return parse_csv(in, path);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(fields[i]);
  }
  out << '\n';
}

namespace {

std::vector<std::size_t> trial_columns(const CsvTable& table, const std::string& source) {
  std::vector<std::size_t> idx;
  for (const auto& name : kTrialColumns) {
    try {
      idx.push_back(table.column(name));
    } catch (const SchemaError&) {
      throw SchemaError(source + ": missing column \"" + name + "\"");
    }
  }
  return idx;
}

TrialRecord trial_from_row(const std::vector<std::string>& row, const std::vector<std::size_t>& idx,
                           const std::string& where) {
  auto num = [&](std::size_t c) {
    return parse_number(row[idx[c]], where + ": column \"" + kTrialColumns[c] + "\"");
  };
  TrialRecord t;
  t.participant_id = row[idx[0]];
  t.task = row[idx[1]];
  t.trial_id = row[idx[2]];
  t.stim_id = row[idx[3]];
  t.context.distance_cm = num(4);
  t.context.px_per_cm = num(5);
  t.context.x_axis = {num(8), num(9), num(6)};
  t.context.y_axis = {num(10), num(11), num(7)};
  t.true_x = num(12);
  t.true_y = num(13);
  t.resp_x = num(14);
  t.resp_y = num(15);
  t.condition = row[idx[16]];
  if (t.participant_id.empty()) throw SchemaError(where + ": column \"participant_id\" is empty");
  if (t.task.empty()) throw SchemaError(where + ": column \"task\" is empty");
  try {
    t.context.validate();
  } catch (const std::exception& e) {
    throw SchemaError(where + ": invalid viewing context: " + e.what());
  }
  return t;
}

}  // namespace

std::vector<TrialRecord> trials_from_table(const CsvTable& table, const std::string& source) {
  const auto idx = trial_columns(table, source);
  std::vector<TrialRecord> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    out.push_back(trial_from_row(table.rows[r], idx, source + ":" + std::to_string(table.line_numbers[r])));
  return out;
}

std::vector<TrialRecord> read_trials(const std::string& path) {
  return trials_from_table(read_csv(path), path);
}

std::vector<std::string> validate_trials_table(const CsvTable& table, const std::string& source) {
  std::vector<std::string> problems;
  std::vector<std::size_t> idx;
  for (const auto& name : kTrialColumns) {
    try {
      idx.push_back(table.column(name));
    } catch (const SchemaError&) {
      problems.push_back(source + ": missing column \"" + name + "\"");
    }
  }
  if (!problems.empty()) return problems;
  if (table.rows.empty()) problems.push_back(source + ": no trial rows");
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    try {
      trial_from_row(table.rows[r], idx, source + ":" + std::to_string(table.line_numbers[r]));
    } catch (const SchemaError& e) {
      problems.push_back(e.what());
    }
  }
  return problems;
}

void write_trials(std::ostream& out, const std::vector<TrialRecord>& trials) {
  write_csv_row(out, kTrialColumns);
  for (const auto& t : trials) {
    const auto& c = t.context;
    write_csv_row(out, {t.participant_id, t.task, t.trial_id, t.stim_id, format_number(c.distance_cm),
                        format_number(c.px_per_cm), format_number(c.x_axis.length_px),
                        format_number(c.y_axis.length_px), format_number(c.x_axis.data_min),
                        format_number(c.x_axis.data_max), format_number(c.y_axis.data_min),
                        format_number(c.y_axis.data_max), format_number(t.true_x),
                        format_number(t.true_y), format_number(t.resp_x), format_number(t.resp_y),
                        t.condition});
  }
}

}  // namespace percept
