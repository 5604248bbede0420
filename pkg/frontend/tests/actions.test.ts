import { describe, expect, it } from "vitest";

import { ackWinner, postIncentive, submitComfort } from "../src/actions";
import { initialState } from "../src/state";
import { FakeFetch } from "./helpers";

describe("comfort votes", () => {
  it("moves the selection once the server accepts", async () => {
    const fake = new FakeFetch().on("POST", "/v1/comfort", (_p, init) => ({
      status: 201,
      body: init.body,
    }));
    const state = initialState();
    await submitComfort(fake.fn, state, "p1", 2);
    expect(state.comfortSelection).toBe(2);
    expect(state.comfortError).toBeNull();
    expect(state.comfortSaved).toBe(true);
    expect(fake.calls[0]?.body).toEqual({ participant_id: "p1", level: 2 });
  });

  it("keeps the old selection and shows the rejection inline on 422", async () => {
    const fake = new FakeFetch().on("POST", "/v1/comfort", () => ({
      status: 422,
      body: { detail: "comfort level must be an integer in [-3, 3]" },
    }));
    const state = initialState();
    state.comfortSelection = 1;
    await submitComfort(fake.fn, state, "p1", 7);
    expect(state.comfortSelection).toBe(1);
    expect(state.comfortError).toBe("comfort level must be an integer in [-3, 3]");
    expect(state.comfortSaved).toBe(false);
  });
});

describe("operator incentive posting", () => {
  it("sends the operator token and reports success inline", async () => {
    const fake = new FakeFetch().on("POST", "/v1/incentives", (_p, init) => {
      if (init.headers?.["X-Operator-Token"] !== "sesame") {
        return { status: 403, body: { detail: "operator token required" } };
      }
      return { status: 201, body: init.body };
    });
    const state = initialState();
    await postIncentive(fake.fn, state, "sesame", "2016-09-19", 25);
    expect(state.operatorNotice).toBe("posted $25 for 2016-09-19");
    expect(fake.calls[0]?.body).toEqual({ date: "2016-09-19", amount_usd: 25 });
  });

  it("surfaces a duplicate-day 409 inline without clearing the form", async () => {
    const fake = new FakeFetch().on("POST", "/v1/incentives", () => ({
      status: 409,
      body: { detail: "incentive already posted for 2016-09-19" },
    }));
    const state = initialState();
    await postIncentive(fake.fn, state, "sesame", "2016-09-19", 25);
    expect(state.operatorNotice).toBe("incentive already posted for 2016-09-19");
  });

  it("surfaces a bad-amount 422 inline", async () => {
    const fake = new FakeFetch().on("POST", "/v1/incentives", () => ({
      status: 422,
      body: { detail: "amount must be one of 5,10,...,50 USD" },
    }));
    const state = initialState();
    await postIncentive(fake.fn, state, "sesame", "2016-09-19", 12);
    expect(state.operatorNotice).toBe("amount must be one of 5,10,...,50 USD");
  });

  it("reports a missing token as the server's 403", async () => {
    const fake = new FakeFetch().on("POST", "/v1/incentives", (_p, init) =>
      init.headers?.["X-Operator-Token"] === "sesame"
        ? { status: 201, body: init.body }
        : { status: 403, body: { detail: "operator token required" } },
    );
    const state = initialState();
    await postIncentive(fake.fn, state, undefined, "2016-09-19", 25);
    expect(state.operatorNotice).toBe("operator token required");
  });

  it("never conjures the occupant banner itself: that waits for the next poll", async () => {
    const fake = new FakeFetch().on("POST", "/v1/incentives", (_p, init) => ({
      status: 201,
      body: init.body,
    }));
    const state = initialState();
    await postIncentive(fake.fn, state, "sesame", "2016-09-19", 25);
    expect(state.leaderboard).toBeNull();
  });
});

describe("winner acknowledgement", () => {
  it("clears the banner once the server records the ack", async () => {
    const fake = new FakeFetch().on("POST", "/v1/notifications/ack", () => ({
      status: 204,
      body: null,
    }));
    const state = initialState();
    state.winner = { date: "2016-09-19", participant_id: "p1", amount_usd: 25 };
    await ackWinner(fake.fn, state, "p1");
    expect(state.winner).toBeNull();
    expect(fake.calls[0]?.body).toEqual({ participant_id: "p1", date: "2016-09-19" });
  });

  it("keeps the banner if the ack fails", async () => {
    const fake = new FakeFetch().on("POST", "/v1/notifications/ack", () => ({
      status: 500,
      body: null,
    }));
    const state = initialState();
    state.winner = { date: "2016-09-19", participant_id: "p1", amount_usd: 25 };
    await ackWinner(fake.fn, state, "p1");
    expect(state.winner).not.toBeNull();
  });

  it("is a no-op without a pending banner", async () => {
    const fake = new FakeFetch();
    const state = initialState();
    await ackWinner(fake.fn, state, "p1");
    expect(fake.calls).toHaveLength(0);
  });
});
