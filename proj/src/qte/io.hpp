#pragma once

#include <string>

#include "json.hpp"
#include "qte/bias.hpp"
#include "qte/maxmax.hpp"
#include "qte/model.hpp"

namespace qte {

inline constexpr int kSchemaVersion = 1;

/// Decimal formatting with 17 significant digits; round-trips any double.
std::string g17(double value);

double parse_double(const std::string& text);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// One value per line. Loading accepts comma- or whitespace-separated values.
void save_signal_csv(std::span<const double> x, const std::string& path);
Signal load_signal_csv(const std::string& path);

/// Columnar CSV (header row: index[,phi],y0..y{N-1}) plus a JSON header with
/// dimension, count, sigma, seed, and the template spec. Values use 17
/// significant digits, so a save/load/save cycle is byte-identical. Hidden
/// noises are in-memory only and are not serialized.
void save_dataset(const Dataset& ds, const std::string& csv_path, const std::string& json_path);
Dataset load_dataset(const std::string& csv_path, const std::string& json_path);

nlohmann::json to_json(const TemplateSpec& spec);
TemplateSpec template_spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const KarcherCertificate& cert);
nlohmann::json to_json(const KEstimate& k);
nlohmann::json to_json(const BiasReport& report);
nlohmann::json to_json(const Moments& moments);

}  // namespace qte
