/** Shared across the global setup and the test files. */
export const SERVICE_PORT = 8077;
export const BASE = `http://127.0.0.1:${SERVICE_PORT}`;
