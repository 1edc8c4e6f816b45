#pragma once

// Simplicial meshes in one, two and three dimensions.
//
// A Mesh owns its vertices, cells and boundary facets and caches the constant
// P1 geometry (volume and barycentric gradients) of every cell. It is
// immutable after construction.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace redist {

using Index = std::int32_t;

template <int Dim>
using Point = std::array<double, Dim>;

template <int Dim>
using Vec = std::array<double, Dim>;

/// Scalar function of a point (level sets, exact distances).
template <int Dim>
using PointFunction = std::function<double(const Point<Dim>&)>;

namespace detail {

template <int Dim>
constexpr double dot(const Vec<Dim>& a, const Vec<Dim>& b) {
  double s = 0.0;
  for (int k = 0; k < Dim; ++k) s += a[k] * b[k];
  return s;
}

template <int Dim>
double norm(const Vec<Dim>& a) {
  return std::sqrt(dot<Dim>(a, a));
}

template <int Dim>
constexpr Vec<Dim> sub(const Point<Dim>& a, const Point<Dim>& b) {
  Vec<Dim> r{};
  for (int k = 0; k < Dim; ++k) r[k] = a[k] - b[k];
  return r;
}

template <int Dim>
constexpr Vec<Dim> axpy(double alpha, const Vec<Dim>& x, const Vec<Dim>& y) {
  Vec<Dim> r{};
  for (int k = 0; k < Dim; ++k) r[k] = alpha * x[k] + y[k];
  return r;
}

template <int Dim>
constexpr Vec<Dim> scale(double alpha, const Vec<Dim>& x) {
  Vec<Dim> r{};
  for (int k = 0; k < Dim; ++k) r[k] = alpha * x[k];
  return r;
}

inline Vec<3> cross(const Vec<3>& a, const Vec<3>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

constexpr double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// Square matrix stored row-major as rows[i][j].
template <int Dim>
using SmallMat = std::array<std::array<double, Dim>, Dim>;

template <int Dim>
double determinant(const SmallMat<Dim>& m) {
  if constexpr (Dim == 1) {
    return m[0][0];
  } else if constexpr (Dim == 2) {
    return m[0][0] * m[1][1] - m[0][1] * m[1][0];
  } else {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  }
}

template <int Dim>
SmallMat<Dim> inverse(const SmallMat<Dim>& m, double det) {
  SmallMat<Dim> r{};
  if constexpr (Dim == 1) {
    r[0][0] = 1.0 / det;
  } else if constexpr (Dim == 2) {
    r[0][0] = m[1][1] / det;
    r[0][1] = -m[0][1] / det;
    r[1][0] = -m[1][0] / det;
    r[1][1] = m[0][0] / det;
  } else {
    r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
    r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
    r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
    r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
    r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
    r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
    r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
    r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
    r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  }
  return r;
}

}  // namespace detail

/// Constant P1 data of one simplex.
template <int Dim>
struct CellGeometry {
  double volume = 0.0;
  /// Gradient of the barycentric coordinate of each vertex; they sum to zero.
  std::array<Vec<Dim>, Dim + 1> grad_barycentric{};
  std::array<Index, Dim + 1> vertex_ids{};
};

/// A facet on the mesh boundary with its outward unit normal.
template <int Dim>
struct BoundaryFacet {
  std::array<Index, Dim> vertices{};
  Vec<Dim> normal{};
  double measure = 0.0;
  Index cell = 0;
};

/// Signed volume times Dim! (the Jacobian determinant) of a simplex.
template <int Dim>
double simplex_jacobian(const std::array<Point<Dim>, Dim + 1>& x) {
  detail::SmallMat<Dim> jac{};
  for (int i = 0; i < Dim; ++i)
    for (int k = 0; k < Dim; ++k) jac[k][i] = x[i + 1][k] - x[0][k];
  return detail::determinant<Dim>(jac);
}

/// Volume and barycentric gradients of the simplex with the given corners.
template <int Dim>
CellGeometry<Dim> simplex_geometry(const std::array<Point<Dim>, Dim + 1>& x) {
  // J has columns x_i - x_0; the rows of J^{-1} are the gradients of
  // lambda_1..lambda_Dim.
  detail::SmallMat<Dim> jac{};
  for (int i = 0; i < Dim; ++i)
    for (int k = 0; k < Dim; ++k) jac[k][i] = x[i + 1][k] - x[0][k];
  const double det = detail::determinant<Dim>(jac);
  if (!(std::abs(det) > 0.0)) throw std::invalid_argument("degenerate simplex");
  const auto inv = detail::inverse<Dim>(jac, det);

  CellGeometry<Dim> g;
  g.volume = std::abs(det) / detail::factorial(Dim);
  Vec<Dim> sum{};
  for (int i = 0; i < Dim; ++i) {
    for (int k = 0; k < Dim; ++k) {
      g.grad_barycentric[i + 1][k] = inv[i][k];
      sum[k] += inv[i][k];
    }
  }
  g.grad_barycentric[0] = detail::scale<Dim>(-1.0, sum);
  return g;
}

/// Measure of a (Dim-1)-simplex embedded in R^Dim; a point has measure one.
template <int Dim>
double facet_measure(const std::array<Point<Dim>, Dim>& x) {
  if constexpr (Dim == 1) {
    return 1.0;
  } else if constexpr (Dim == 2) {
    return detail::norm<2>(detail::sub<2>(x[1], x[0]));
  } else {
    return 0.5 * detail::norm<3>(detail::cross(detail::sub<3>(x[1], x[0]),
                                               detail::sub<3>(x[2], x[0])));
  }
}

/// Some unit normal of a facet (orientation unspecified).
template <int Dim>
Vec<Dim> facet_unit_normal(const std::array<Point<Dim>, Dim>& x) {
  Vec<Dim> n{};
  if constexpr (Dim == 1) {
    n[0] = 1.0;
  } else if constexpr (Dim == 2) {
    const auto t = detail::sub<2>(x[1], x[0]);
    n = {t[1], -t[0]};
  } else {
    n = detail::cross(detail::sub<3>(x[1], x[0]), detail::sub<3>(x[2], x[0]));
  }
  return detail::scale<Dim>(1.0 / detail::norm<Dim>(n), n);
}

template <int Dim>
class Mesh {
 public:
  static constexpr int dim = Dim;
  using Cell = std::array<Index, Dim + 1>;

  Mesh() = default;

  /// Validates connectivity, orients every cell positively and extracts the
  /// boundary. `h` is the nominal mesh size reported to callers.
  Mesh(std::vector<Point<Dim>> vertices, std::vector<Cell> cells, double h)
      : vertices_(std::move(vertices)), cells_(std::move(cells)), h_(h) {
    static_assert(Dim >= 1 && Dim <= 3, "only 1D, 2D and 3D meshes");
    if (cells_.empty()) throw std::invalid_argument("mesh has no cells");
    const auto nv = static_cast<Index>(vertices_.size());
    geometry_.reserve(cells_.size());
    for (auto& cell : cells_) {
      for (Index v : cell)
        if (v < 0 || v >= nv) throw std::out_of_range("cell vertex index out of range");
      if (simplex_jacobian<Dim>(corners(cell)) < 0.0) std::swap(cell[0], cell[1]);
      auto g = simplex_geometry<Dim>(corners(cell));
      g.vertex_ids = cell;
      geometry_.push_back(g);
    }
    build_boundary();
  }

  [[nodiscard]] const std::vector<Point<Dim>>& vertices() const { return vertices_; }
  [[nodiscard]] const std::vector<Cell>& cells() const { return cells_; }
  [[nodiscard]] const std::vector<BoundaryFacet<Dim>>& boundary_facets() const {
    return boundary_facets_;
  }
  [[nodiscard]] std::size_t num_vertices() const { return vertices_.size(); }
  [[nodiscard]] std::size_t num_cells() const { return cells_.size(); }
  [[nodiscard]] double h() const { return h_; }

  /// Cached geometry; no bounds check.
  [[nodiscard]] const CellGeometry<Dim>& geometry(std::size_t c) const { return geometry_[c]; }

  [[nodiscard]] std::array<Point<Dim>, Dim + 1> corners(const Cell& cell) const {
    std::array<Point<Dim>, Dim + 1> x{};
    for (int i = 0; i <= Dim; ++i) x[i] = vertices_[cell[i]];
    return x;
  }
  [[nodiscard]] std::array<Point<Dim>, Dim + 1> corners(std::size_t c) const {
    return corners(cells_[c]);
  }

  /// Longest edge of a cell.
  [[nodiscard]] double cell_diameter(std::size_t c) const {
    const auto x = corners(c);
    double d = 0.0;
    for (int i = 0; i <= Dim; ++i)
      for (int j = i + 1; j <= Dim; ++j)
        d = std::max(d, detail::norm<Dim>(detail::sub<Dim>(x[i], x[j])));
    return d;
  }

  [[nodiscard]] Point<Dim> centroid(std::size_t c) const {
    Point<Dim> m{};
    for (Index v : cells_[c])
      for (int k = 0; k < Dim; ++k) m[k] += vertices_[v][k] / (Dim + 1);
    return m;
  }

  [[nodiscard]] double total_volume() const {
    double s = 0.0;
    for (const auto& g : geometry_) s += g.volume;
    return s;
  }

  /// Diagonal of the vertex bounding box.
  [[nodiscard]] double bounding_diameter() const {
    Point<Dim> lo = vertices_.front(), hi = vertices_.front();
    for (const auto& p : vertices_)
      for (int k = 0; k < Dim; ++k) {
        lo[k] = std::min(lo[k], p[k]);
        hi[k] = std::max(hi[k], p[k]);
      }
    return detail::norm<Dim>(detail::sub<Dim>(hi, lo));
  }

 private:
  void build_boundary() {
    using Key = std::array<Index, Dim>;
    struct Use {
      int count = 0;
      Index cell = 0;
      Key verts{};
    };
    std::map<Key, Use> facets;
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      for (int skip = 0; skip <= Dim; ++skip) {
        Key f{};
        for (int i = 0, j = 0; i <= Dim; ++i)
          if (i != skip) f[j++] = cells_[c][i];
        Key key = f;
        std::sort(key.begin(), key.end());
        auto& use = facets[key];
        if (use.count == 0) {
          use.cell = static_cast<Index>(c);
          use.verts = f;
        }
        ++use.count;
      }
    }
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      for (int skip = 0; skip <= Dim; ++skip) {
        Key key{};
        for (int i = 0, j = 0; i <= Dim; ++i)
          if (i != skip) key[j++] = cells_[c][i];
        std::sort(key.begin(), key.end());
        const auto& use = facets.at(key);
        if (use.count > 2) throw std::invalid_argument("non-manifold facet in mesh");
        if (use.count != 1) continue;
        BoundaryFacet<Dim> bf;
        bf.vertices = use.verts;
        bf.cell = use.cell;
        std::array<Point<Dim>, Dim> x{};
        for (int i = 0; i < Dim; ++i) x[i] = vertices_[bf.vertices[i]];
        bf.measure = facet_measure<Dim>(x);
        bf.normal = facet_unit_normal<Dim>(x);
        const auto away = detail::sub<Dim>(x[0], centroid(c));
        if (detail::dot<Dim>(bf.normal, away) < 0.0) bf.normal = detail::scale<Dim>(-1.0, bf.normal);
        boundary_facets_.push_back(bf);
      }
    }
  }

  std::vector<Point<Dim>> vertices_;
  std::vector<Cell> cells_;
  std::vector<CellGeometry<Dim>> geometry_;
  std::vector<BoundaryFacet<Dim>> boundary_facets_;
  double h_ = 0.0;
};

/// Uniform subdivision of [a, b] into n intervals.
inline Mesh<1> build_interval_mesh(double a, double b, int n) {
  if (n < 1) throw std::invalid_argument("interval mesh needs at least one cell");
  if (!(a < b)) throw std::invalid_argument("interval mesh needs a < b");
  std::vector<Point<1>> v(n + 1);
  for (int i = 0; i <= n; ++i) v[i] = {i == n ? b : a + (b - a) * i / n};
  std::vector<Mesh<1>::Cell> c(n);
  for (int i = 0; i < n; ++i) c[i] = {i, i + 1};
  return Mesh<1>(std::move(v), std::move(c), (b - a) / n);
}

/// Structured simplicial mesh of an axis-aligned box.
///
/// Squares are split along the lower-left to upper-right diagonal; cubes use
/// the Kuhn subdivision into six tetrahedra sharing the main diagonal, which
/// is conforming across neighbouring cubes. The reported h is the largest
/// axis-aligned edge length.
template <int Dim>
Mesh<Dim> build_box_mesh(const Point<Dim>& lower, const Point<Dim>& upper,
                         const std::array<int, Dim>& n) {
  static_assert(Dim == 2 || Dim == 3, "box meshes are 2D or 3D");
  double h = 0.0;
  for (int k = 0; k < Dim; ++k) {
    if (!(lower[k] < upper[k])) throw std::invalid_argument("degenerate box");
    if (n[k] < 1) throw std::invalid_argument("box mesh needs at least one cell per axis");
    h = std::max(h, (upper[k] - lower[k]) / n[k]);
  }
  auto coord = [&](int k, int i) {
    return i == n[k] ? upper[k] : lower[k] + (upper[k] - lower[k]) * i / n[k];
  };

  std::vector<Point<Dim>> verts;
  std::vector<typename Mesh<Dim>::Cell> cells;
  if constexpr (Dim == 2) {
    const int nx = n[0] + 1;
    auto id = [&](int i, int j) { return static_cast<Index>(j * nx + i); };
    for (int j = 0; j <= n[1]; ++j)
      for (int i = 0; i <= n[0]; ++i) verts.push_back({coord(0, i), coord(1, j)});
    for (int j = 0; j < n[1]; ++j) {
      for (int i = 0; i < n[0]; ++i) {
        cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
        cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
      }
    }
  } else {
    const int nx = n[0] + 1, ny = n[1] + 1;
    auto id = [&](int i, int j, int k) { return static_cast<Index>((k * ny + j) * nx + i); };
    for (int k = 0; k <= n[2]; ++k)
      for (int j = 0; j <= n[1]; ++j)
        for (int i = 0; i <= n[0]; ++i) verts.push_back({coord(0, i), coord(1, j), coord(2, k)});
    std::array<int, 3> perm{0, 1, 2};
    std::vector<std::array<int, 3>> perms;
    do {
      perms.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (int k = 0; k < n[2]; ++k) {
      for (int j = 0; j < n[1]; ++j) {
        for (int i = 0; i < n[0]; ++i) {
          for (const auto& p : perms) {
            std::array<int, 3> o{i, j, k};
            typename Mesh<3>::Cell tet{};
            tet[0] = id(o[0], o[1], o[2]);
            for (int s = 0; s < 3; ++s) {
              ++o[p[s]];
              tet[s + 1] = id(o[0], o[1], o[2]);
            }
            cells.push_back(tet);
          }
        }
      }
    }
  }
  return Mesh<Dim>(std::move(verts), std::move(cells), h);
}

/// Geometry of one cell with range checking.
template <int Dim>
const CellGeometry<Dim>& cell_geometry(const Mesh<Dim>& mesh, std::size_t cell_id) {
  if (cell_id >= mesh.num_cells()) throw std::out_of_range("cell id out of range");
  return mesh.geometry(cell_id);
}

/// A mesh made of a subset of cells, with the map back to parent vertices.
template <int Dim>
struct Submesh {
  Mesh<Dim> mesh;
  std::vector<Index> parent_vertex;  // submesh vertex -> parent vertex
  std::vector<Index> parent_cell;    // submesh cell -> parent cell
};

/// Extracts the given cells (in the given order). Vertices keep their parent
/// relative order, so selecting every cell reproduces the parent numbering.
template <int Dim>
Submesh<Dim> extract_submesh(const Mesh<Dim>& mesh, std::span<const Index> cell_ids) {
  if (cell_ids.empty()) throw std::invalid_argument("empty cell selection");
  std::vector<char> used(mesh.num_vertices(), 0);
  for (Index c : cell_ids)
    for (Index v : mesh.cells().at(c)) used[v] = 1;
  std::vector<Index> new_id(mesh.num_vertices(), -1);
  Submesh<Dim> sub;
  std::vector<Point<Dim>> verts;
  for (std::size_t v = 0; v < used.size(); ++v) {
    if (!used[v]) continue;
    new_id[v] = static_cast<Index>(verts.size());
    verts.push_back(mesh.vertices()[v]);
    sub.parent_vertex.push_back(static_cast<Index>(v));
  }
  std::vector<typename Mesh<Dim>::Cell> cells;
  cells.reserve(cell_ids.size());
  for (Index c : cell_ids) {
    auto cell = mesh.cells()[c];
    for (auto& v : cell) v = new_id[v];
    cells.push_back(cell);
    sub.parent_cell.push_back(c);
  }
  sub.mesh = Mesh<Dim>(std::move(verts), std::move(cells), mesh.h());
  return sub;
}

}  // namespace redist
