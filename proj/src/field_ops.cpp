#include "fld/field_ops.hpp"

#include <stdexcept>

namespace fld::field_ops {

namespace {

void require_shape(const Field& a, const Field& b) {
    if (!a.same_shape(b)) throw std::logic_error("field shape mismatch");
}

}  // namespace

double local_dot(KernelPath path, const Field& a, const Field& b) {
    require_shape(a, b);
    double sum = 0.0;
    for (int i2 = 0; i2 < a.len2(); ++i2) sum += kernels::dprod(path, a.row(i2), b.row(i2));
    return sum;
}

std::vector<double> ganged_dot(Communicator& comm, KernelPath path,
                               std::initializer_list<FieldPair> pairs) {
    std::vector<double> local;
    local.reserve(pairs.size());
    for (const auto& [a, b] : pairs) local.push_back(local_dot(path, *a, *b));
    return comm.reduce_sum(local);
}

void daxpy(KernelPath path, double a, const Field& x, const Field& y, Field& out) {
    require_shape(x, y);
    require_shape(x, out);
    for (int i2 = 0; i2 < x.len2(); ++i2) kernels::daxpy(path, a, x.row(i2), y.row(i2), out.row(i2));
}

void dscal(KernelPath path, const Field& c, double d, const Field& y, Field& out) {
    require_shape(c, y);
    require_shape(c, out);
    for (int i2 = 0; i2 < c.len2(); ++i2) kernels::dscal(path, c.row(i2), d, y.row(i2), out.row(i2));
}

void ddaxpy(KernelPath path, double a, const Field& x, double b, const Field& y, const Field& z,
            Field& out) {
    require_shape(x, y);
    require_shape(x, z);
    require_shape(x, out);
    for (int i2 = 0; i2 < x.len2(); ++i2) {
        kernels::ddaxpy(path, a, x.row(i2), b, y.row(i2), z.row(i2), out.row(i2));
    }
}

double local_sum(const Field& f) {
    double sum = 0.0;
    for (int i2 = 0; i2 < f.len2(); ++i2)
        for (double v : f.row(i2)) sum += v;
    return sum;
}

}  // namespace fld::field_ops
