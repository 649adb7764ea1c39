#pragma once

#include <string>

#include "g2duct/config.hpp"
#include "g2duct/grade2.hpp"

namespace g2duct {

/// CSV of dof-node samples: x,y,component_0[,component_1].
void write_field_csv(const Field& f, const std::string& path);

/// Per-cell text dump: one block per cell listing local node coordinates
/// and values, for external plotting.
void write_field_cells(const Field& f, const std::string& path);

/// Run manifest: every config field in effect, iteration counts, residual
/// history, and formula notes.
void write_manifest(const RunConfig& cfg, const FlowState* state, const StokesResult* stokes,
                    const std::string& path);

}  // namespace g2duct
