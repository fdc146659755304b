#pragma once

#include <initializer_list>
#include <utility>
#include <vector>

#include "fld/comm.hpp"
#include "fld/field.hpp"
#include "fld/kernels.hpp"

namespace fld::field_ops {

using kernels::KernelPath;
using FieldPair = std::pair<const Field*, const Field*>;

/// Tile-local partial of (a, b): row-by-row dprod, rows accumulated in order.
[[nodiscard]] double local_dot(KernelPath path, const Field& a, const Field& b);

/// Global inner products of every pair, shipped in one reduction event.
[[nodiscard]] std::vector<double> ganged_dot(Communicator& comm, KernelPath path,
                                             std::initializer_list<FieldPair> pairs);

// Interior-only elementwise updates; `out` may alias any input.
void daxpy(KernelPath path, double a, const Field& x, const Field& y, Field& out);
void dscal(KernelPath path, const Field& c, double d, const Field& y, Field& out);
void ddaxpy(KernelPath path, double a, const Field& x, double b, const Field& y, const Field& z,
            Field& out);

/// Plain sum of interior values (zone-sum energy).
[[nodiscard]] double local_sum(const Field& f);

}  // namespace fld::field_ops
