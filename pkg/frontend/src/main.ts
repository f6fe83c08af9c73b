/** Browser entry point. The service base URL can be overridden with
 * ?service=http://host:port (defaults to the local service port). */

import { App } from "./app.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("service") ?? "http://127.0.0.1:8040";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

const app = new App(root, baseUrl);
app.init().catch((error) => {
  root.insertAdjacentHTML(
    "beforeend",
    `<p class="startup-error">cannot reach the service at ${baseUrl}: ${String(
      error,
    )}</p>`,
  );
});
