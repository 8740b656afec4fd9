// Fixture served by stub mode: a closed car-like body (tapered hexahedron
// plus cabin), 16 vertices / 24 triangles, nose at +x, ground plane at z=0.
// Plain "v x y z" / "f a b c" OBJ, 1-based indices, no normals or texture
// coordinates, so any minimal loader can read it.

export const STUB_MODEL_ID = "stub-car-v1";

export const FIXTURE_CAR_OBJ = `v -0.5 -0.2644867075451648 0.0
v -0.5 -0.2644867075451648 0.4444656980313607
v -0.5 0.2644867075451648 0.0
v -0.5 0.2644867075451648 0.4444656980313607
v 0.5 -0.2314966038073938 0.0
v 0.5 -0.2314966038073938 0.3890263543228249
v 0.5 0.2314966038073938 0.0
v 0.5 0.2314966038073938 0.3890263543228249
v -0.35 -0.20629963188522854 0.4444656980313607
v -0.35 -0.20629963188522854 0.644475262145473
v -0.35 0.20629963188522854 0.4444656980313607
v -0.35 0.20629963188522854 0.644475262145473
v 0.1 -0.20629963188522854 0.4444656980313607
v 0.1 -0.20629963188522854 0.644475262145473
v 0.1 0.20629963188522854 0.4444656980313607
v 0.1 0.20629963188522854 0.644475262145473
f 1 2 4
f 1 4 3
f 5 7 8
f 5 8 6
f 1 5 6
f 1 6 2
f 3 4 8
f 3 8 7
f 1 3 7
f 1 7 5
f 2 6 8
f 2 8 4
f 9 10 12
f 9 12 11
f 13 15 16
f 13 16 14
f 9 13 14
f 9 14 10
f 11 12 16
f 11 16 15
f 9 11 15
f 9 15 13
f 10 14 16
f 10 16 12
`;
