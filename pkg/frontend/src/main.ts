// Browser bootstrap: header controls for the API origin, user identity,
// and page URL; the App does the rest.

import { ApiClient } from "./api.js";
import { App } from "./app.js";

function bootstrap(): void {
  const params = new URLSearchParams(window.location.search);
  const apiBase = params.get("api") ?? window.location.origin;
  const userInput = document.getElementById("user-input") as HTMLInputElement;
  const urlInput = document.getElementById("url-input") as HTMLInputElement;
  const goButton = document.getElementById("go-button") as HTMLButtonElement;

  userInput.value = window.localStorage.getItem("adamant-user") ?? "";
  if (params.get("page")) urlInput.value = params.get("page")!;

  const api = new ApiClient(apiBase, userInput.value || null);
  const app = new App(api, {
    viewer: document.getElementById("viewer")!,
    sidebar: document.getElementById("sidebar")!,
    popupParent: document.body,
  });

  userInput.addEventListener("change", () => {
    api.user = userInput.value.trim() || null;
    window.localStorage.setItem("adamant-user", userInput.value.trim());
    if (urlInput.value) void app.loadPage(urlInput.value.trim());
  });
  goButton.addEventListener("click", () => {
    if (urlInput.value.trim()) void app.loadPage(urlInput.value.trim());
  });
  urlInput.addEventListener("keydown", (event) => {
    if (event.key === "Enter" && urlInput.value.trim()) {
      void app.loadPage(urlInput.value.trim());
    }
  });

  if (urlInput.value) void app.loadPage(urlInput.value.trim());
}

bootstrap();
