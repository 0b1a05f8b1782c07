#include "epibda/io.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace epibda {

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    fields.push_back(first == std::string::npos ? std::string{} : field.substr(first, last - first + 1));
  }
  return fields;
}

double parse_number(const std::string& text, const std::string& path) {
  if (text == "nan" || text == "NaN" || text == "NA") return std::numeric_limits<double>::quiet_NaN();
  // strtod rather than stod: subnormal values (tiny Dirichlet draws) set
  // ERANGE but are still parsed correctly.
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (!text.empty() && end == text.c_str() + text.size()) return v;
  throw std::runtime_error("'" + path + "': cannot parse number '" + text + "'");
}

void write_number(std::ostream& out, double v) {
  if (std::isnan(v)) {
    out << "nan";
  } else {
    out << v;
  }
}

}  // namespace

CsvTable read_csv_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("'" + path + "' is empty");
  table.header = split_csv_line(line);
  table.columns.resize(table.header.size());
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != table.header.size()) {
      throw std::runtime_error("'" + path + "': row with " + std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(table.header.size()));
    }
    for (std::size_t k = 0; k < fields.size(); ++k) table.columns[k].push_back(parse_number(fields[k], path));
  }
  return table;
}

bool CsvTable::has(const std::string& name) const {
  for (const auto& h : header) {
    if (h == name) return true;
  }
  return false;
}

const std::vector<double>& CsvTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) return columns[k];
  }
  throw std::runtime_error("CSV has no column '" + name + "'");
}

Dataset read_dataset_csv(const std::string& path, int population) {
  const CsvTable table = read_csv_table(path);
  Dataset data;
  data.population = population;
  data.times = table.column("time");
  for (double c : table.column("count")) {
    if (c != std::floor(c)) throw std::runtime_error("'" + path + "': counts must be integers");
    data.counts.push_back(static_cast<int>(c));
  }
  validate(data);
  return data;
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  auto out = open_output(path);
  out << "time,count\n";
  for (std::size_t l = 0; l < data.size(); ++l) out << data.times[l] << ',' << data.counts[l] << '\n';
}

void write_chain_csv(const std::string& path, const ChainOutput& chain, const ModelSpec& model) {
  static const char* const labels[] = {"S", "E", "I", "R"};
  auto out = open_output(path);
  out << "iteration,logpost,beta,gamma,mu,rho,phi";
  for (const char* label : labels) out << ",p_" << label;
  out << ",accept_rate\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t r = 0; r < chain.draws.size(); ++r) {
    const Parameters& theta = chain.draws[r];
    out << chain.iteration[r];
    for (double v : {chain.logpost[r], theta.beta, model.uses(RateParam::Gamma) ? theta.gamma : nan, theta.mu,
                     theta.rho, theta.phi}) {
      out << ',';
      write_number(out, v);
    }
    for (const char* label : labels) {
      const int s = model.state_index(label);
      out << ',';
      write_number(out, s < 0 ? nan : theta.p_init[static_cast<std::size_t>(s)]);
    }
    out << ',';
    write_number(out, chain.accept_rate[r]);
    out << '\n';
  }
}

void write_snapshot_csv(const std::string& path, const ChainOutput& chain, const ModelSpec& model,
                        const std::vector<double>& grid) {
  auto out = open_output(path);
  out << "iteration,time";
  for (const auto& label : model.states()) out << ',' << label;
  out << '\n';
  for (std::size_t s = 0; s < chain.snapshots.size(); ++s) {
    const auto rows = compartment_counts_at(chain.snapshots[s], grid);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      out << chain.snapshot_iteration[s] << ',' << grid[g];
      for (int c : rows[g]) out << ',' << c;
      out << '\n';
    }
  }
}

void write_latent_summary_csv(const std::string& path, const std::vector<LatentSummaryRow>& rows,
                              const ModelSpec& model, const std::vector<double>& levels) {
  auto out = open_output(path);
  out << "time,state";
  for (double level : levels) {
    std::ostringstream name;
    name << 'q' << std::setw(3) << std::setfill('0') << static_cast<int>(std::lround(level * 1000.0));
    std::string label = name.str();
    // q500 reads better as q50, q975 stays as is.
    if (label.size() == 4 && label.back() == '0') label.pop_back();
    out << ',' << label;
  }
  out << '\n';
  for (const auto& row : rows) {
    out << row.time << ',' << model.states()[static_cast<std::size_t>(row.state)];
    for (double q : row.quantiles) out << ',' << q;
    out << '\n';
  }
}

void write_trajectory_csv(const std::string& path, const LumpedPath& path_data, const ModelSpec& model) {
  auto out = open_output(path);
  out << "time";
  for (const auto& label : model.states()) out << ',' << label;
  out << '\n';
  std::vector<int> counts = path_data.initial_counts;
  auto emit = [&](double t) {
    out << t;
    for (int c : counts) out << ',' << c;
    out << '\n';
  };
  emit(path_data.start);
  for (const auto& e : path_data.events) {
    const auto& t = model.transitions()[static_cast<std::size_t>(e.transition)];
    --counts[t.from];
    ++counts[t.to];
    emit(e.time);
  }
}

}  // namespace epibda
