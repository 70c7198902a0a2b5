#pragma once

#include "ledger_emd/analysis.hpp"
#include "ledger_emd/baselines.hpp"
#include "ledger_emd/chart.hpp"
#include "ledger_emd/distance_matrix.hpp"
#include "ledger_emd/emd.hpp"
#include "ledger_emd/error.hpp"
#include "ledger_emd/lof.hpp"
#include "ledger_emd/lp_oracle.hpp"
#include "ledger_emd/svg.hpp"
#include "ledger_emd/synth.hpp"
#include "ledger_emd/trial_balance.hpp"
#include "ledger_emd/tsne.hpp"
#include "ledger_emd/weights.hpp"
