#pragma once

// CSV reading/writing for trial and prediction tables. Numbers are written in
// shortest round-trip form with '.' decimals and LF line endings.

#include <iosfwd>
#include <string>
#include <vector>

#include "percept/fitting.hpp"

namespace percept {

std::string format_number(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  // Column index; throws SchemaError naming the column when absent.
  std::size_t column(const std::string& name) const;
};

CsvTable parse_csv(std::istream& in, const std::string& source);
CsvTable read_csv(const std::string& path);

std::string csv_escape(const std::string& field);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

extern const std::vector<std::string> kTrialColumns;

// Strict conversion; errors carry the source line and column name.
std::vector<TrialRecord> trials_from_table(const CsvTable& table, const std::string& source);
std::vector<TrialRecord> read_trials(const std::string& path);
void write_trials(std::ostream& out, const std::vector<TrialRecord>& trials);

// Every problem found (line/field level); empty when valid.
std::vector<std::string> validate_trials_table(const CsvTable& table, const std::string& source);

double parse_number(const std::string& text, const std::string& where);

}  // namespace percept
