import { describe, expect, it } from 'vitest';
import {
  drawWireframe,
  parseObj,
  projectVertices,
  uniqueEdges,
  type WirePen,
} from '../src/objview.js';

const CUBE_OBJ = `o cube
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
f 1 2 3 4
f 5 6 7 8
f 1 2 6 5
f 2 3 7 6
f 3 4 8 7
f 4 1 5 8
`;

describe('parseObj', () => {
  it('reads vertices and deduplicates shared edges', () => {
    const mesh = parseObj(CUBE_OBJ);
    expect(mesh.positions).toHaveLength(24);
    expect(mesh.edges).toHaveLength(24); // the 12 unique edges of a cube
  });

  it('handles v/vt/vn face syntax', () => {
    const mesh = parseObj('v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1/1 2/2/2 3/3/3\n');
    expect(mesh.positions).toHaveLength(9);
    expect(mesh.edges).toHaveLength(6);
  });

  it('ignores blank lines and unknown records', () => {
    const mesh = parseObj('# comment\n\nvn 0 0 1\nv 0 0 0\nv 1 0 0\nl 1 2\n');
    expect(mesh.positions).toHaveLength(6);
    expect(mesh.edges).toHaveLength(0);
  });
});

describe('uniqueEdges', () => {
  it('shares edges between adjacent faces once', () => {
    const edges = uniqueEdges([
      [0, 1, 2],
      [0, 2, 3],
    ]);
    expect(edges).toHaveLength(10); // 5 distinct edges
  });

  it('stores edges with the smaller index first', () => {
    const edges = uniqueEdges([[2, 0, 1]]);
    for (let e = 0; e < edges.length; e += 2) {
      expect(edges[e]).toBeLessThan(edges[e + 1]);
    }
  });
});

describe('projectVertices', () => {
  it('centers the bounding box on the canvas midpoint', () => {
    const pts = projectVertices([0, 0, 0, 1, 1, 1], 0.3, 0.2, 200, 100);
    expect(pts[0] + pts[2]).toBeCloseTo(200);
    expect(pts[1] + pts[3]).toBeCloseTo(100);
  });

  it('fits the mesh inside the canvas at any orbit', () => {
    const mesh = parseObj(CUBE_OBJ);
    for (const [yaw, pitch] of [[0, 0], [0.7, 0.4], [2.3, -1.2], [5.9, 1.5]]) {
      const pts = projectVertices(mesh.positions, yaw, pitch, 300, 220);
      for (let i = 0; i < pts.length; i += 2) {
        expect(pts[i]).toBeGreaterThanOrEqual(0);
        expect(pts[i]).toBeLessThanOrEqual(300);
        expect(pts[i + 1]).toBeGreaterThanOrEqual(0);
        expect(pts[i + 1]).toBeLessThanOrEqual(220);
      }
    }
  });

  it('puts a degenerate mesh at the center instead of dividing by zero', () => {
    const pts = projectVertices([2, 2, 2], 1.0, 0.5, 120, 80);
    expect(pts[0]).toBeCloseTo(60);
    expect(pts[1]).toBeCloseTo(40);
  });
});

describe('drawWireframe', () => {
  it('draws one segment per unique edge', () => {
    const calls = { move: 0, line: 0, cleared: 0, stroked: 0 };
    const pen: WirePen = {
      strokeStyle: '',
      lineWidth: 0,
      clearRect: () => {
        calls.cleared += 1;
      },
      beginPath: () => undefined,
      moveTo: () => {
        calls.move += 1;
      },
      lineTo: () => {
        calls.line += 1;
      },
      stroke: () => {
        calls.stroked += 1;
      },
    };
    drawWireframe(pen, parseObj(CUBE_OBJ), 300, 220, 0.5, 0.3);
    expect(calls.cleared).toBe(1);
    expect(calls.move).toBe(12);
    expect(calls.line).toBe(12);
    expect(calls.stroked).toBe(1);
  });
});
