import { App } from "./app.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? "http://localhost:8008";

const app = new App(baseUrl);
app.start().catch((err) => {
  const status = document.getElementById("status");
  if (status) status.textContent = `failed to reach ${baseUrl}: ${err.message}`;
});
