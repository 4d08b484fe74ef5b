#pragma once

#include <string>
#include <vector>

#include "bundlesight/baselines.hpp"
#include "bundlesight/datagen.hpp"
#include "bundlesight/em_censored.hpp"
#include "bundlesight/em_gmm.hpp"
#include "bundlesight/types.hpp"

// JSON / CSV serialization. All *_from_json functions throw SchemaError with
// the offending field path on malformed input; file helpers throw
// InvalidInputError when the file cannot be opened.
namespace bundlesight::io {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// --- datasets ----------------------------------------------------------------

std::string dataset_to_json(const Dataset& dataset);
Dataset dataset_from_json(const std::string& text);

std::string censored_to_json(const CensoredDataset& dataset);
CensoredDataset censored_from_json(const std::string& text);

// Transaction CSV import: header txn_id,bundle_mask,price,chosen with one row
// per menu entry; rows sharing a txn_id form one menu (grouped by first
// appearance), chosen is 0/1 and at most one row per transaction may carry 1.
Dataset dataset_from_csv(const std::string& text);

// --- model parameters and reports --------------------------------------------

std::string truth_to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const std::string& text);

std::string fit_report_to_json(const FitReport& report,
                               const std::string& method);
// Reads back "mu"/"sigma" (plus metadata) from a fit report.
GaussianParams params_from_json(const std::string& text);

std::string gmm_report_to_json(const GmmFitReport& report);
GmmParams gmm_params_from_json(const std::string& text);

std::string mnl_to_json(const MnlParams& params);
MnlParams mnl_from_json(const std::string& text);

std::string mh_report_to_json(const MhReport& report);
std::string grid_report_to_json(const GridReport& report);

// The "method" field of a serialized report ("em", "em_gmm", "mnl", ...);
// empty string when absent.
std::string detect_method(const std::string& text);

// --- experiment specs and traces ----------------------------------------------

// Generation spec with defaults for every absent field; unknown fields are
// rejected so typos surface instead of silently using defaults.
GenSpec genspec_from_json(const std::string& text);

// "iteration,error" rows, iteration 0 first.
std::string trace_to_csv(const std::vector<double>& errors);

}  // namespace bundlesight::io
