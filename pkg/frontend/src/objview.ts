/** Minimal OBJ wireframe viewer: parse vertices and faces, project with a
 * yaw/pitch orbit, draw unique edges on a 2D canvas context.
 */

export interface WireMesh {
  positions: Float64Array;
  edges: Uint32Array;
}

export function parseObj(text: string): WireMesh {
  const positions: number[] = [];
  const faces: number[][] = [];
  for (const raw of text.split('\n')) {
    const parts = raw.trim().split(/\s+/);
    if (parts[0] === 'v') {
      positions.push(Number(parts[1]), Number(parts[2]), Number(parts[3]));
    } else if (parts[0] === 'f') {
      // f entries are 1-based and may carry /vt/vn suffixes
      const face = parts.slice(1).map((p) => Number(p.split('/')[0]) - 1);
      if (face.length >= 2) faces.push(face);
    }
  }
  return { positions: new Float64Array(positions), edges: uniqueEdges(faces) };
}

/** Boundary edges of every face, deduplicated across shared faces. */
export function uniqueEdges(faces: number[][]): Uint32Array {
  const seen = new Set<number>();
  const out: number[] = [];
  for (const face of faces) {
    for (let i = 0; i < face.length; i++) {
      const a = face[i];
      const b = face[(i + 1) % face.length];
      if (a === b) continue;
      const lo = Math.min(a, b);
      const hi = Math.max(a, b);
      const key = lo * 0x100000 + hi; // safe below ~1M vertices
      if (!seen.has(key)) {
        seen.add(key);
        out.push(lo, hi);
      }
    }
  }
  return new Uint32Array(out);
}

/** Orthographic projection: center on the bounding box, yaw about the model
 * z axis, pitch tilts toward the viewer, fit to 90% of the short canvas
 * side.  Returns x,y pixel pairs. */
export function projectVertices(
  positions: ArrayLike<number>,
  yaw: number,
  pitch: number,
  width: number,
  height: number,
): Float64Array {
  const n = Math.floor(positions.length / 3);
  const out = new Float64Array(n * 2);
  if (!n) return out;
  let minX = Infinity, minY = Infinity, minZ = Infinity;
  let maxX = -Infinity, maxY = -Infinity, maxZ = -Infinity;
  for (let i = 0; i < n; i++) {
    minX = Math.min(minX, positions[i * 3]);
    maxX = Math.max(maxX, positions[i * 3]);
    minY = Math.min(minY, positions[i * 3 + 1]);
    maxY = Math.max(maxY, positions[i * 3 + 1]);
    minZ = Math.min(minZ, positions[i * 3 + 2]);
    maxZ = Math.max(maxZ, positions[i * 3 + 2]);
  }
  const cx = (minX + maxX) / 2;
  const cy = (minY + maxY) / 2;
  const cz = (minZ + maxZ) / 2;
  const diag = Math.hypot(maxX - minX, maxY - minY, maxZ - minZ);
  const scale = diag > 0 ? (0.9 * Math.min(width, height)) / diag : 1;
  const cosYaw = Math.cos(yaw), sinYaw = Math.sin(yaw);
  const cosPitch = Math.cos(pitch), sinPitch = Math.sin(pitch);
  for (let i = 0; i < n; i++) {
    const x = positions[i * 3] - cx;
    const y = positions[i * 3 + 1] - cy;
    const z = positions[i * 3 + 2] - cz;
    const x1 = x * cosYaw - y * sinYaw;
    const y1 = x * sinYaw + y * cosYaw;
    // screen y grows downward; z up on screen at pitch 0
    const sy = -(z * cosPitch - y1 * sinPitch);
    out[i * 2] = width / 2 + x1 * scale;
    out[i * 2 + 1] = height / 2 + sy * scale;
  }
  return out;
}

/** The slice of CanvasRenderingContext2D the wireframe needs; structural, so
 * tests can pass a recording fake. */
export interface WirePen {
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
}

export function drawWireframe(
  pen: WirePen,
  mesh: WireMesh,
  width: number,
  height: number,
  yaw: number,
  pitch: number,
  stroke = '#7aa2f7',
): void {
  pen.clearRect(0, 0, width, height);
  const pts = projectVertices(mesh.positions, yaw, pitch, width, height);
  pen.strokeStyle = stroke;
  pen.lineWidth = 1;
  pen.beginPath();
  for (let e = 0; e < mesh.edges.length; e += 2) {
    const a = mesh.edges[e] * 2;
    const b = mesh.edges[e + 1] * 2;
    pen.moveTo(pts[a], pts[a + 1]);
    pen.lineTo(pts[b], pts[b + 1]);
  }
  pen.stroke();
}
